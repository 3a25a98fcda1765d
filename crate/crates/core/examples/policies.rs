//! One decision from each policy at a fixed state of the tandem preset and
//! of a 3-port switch.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use switchsim::bench::Preset;
use switchsim::model::{MultiHopState, QueueState};
use switchsim::policy::{alpha_g_policy, backpressure, maxweight_alpha, proportional_scheduler};
use switchsim::program::{Objective, Utility};

fn main() -> switchsim::Result<()> {
    let sw = Preset::IqSwitch { n: 3 }.build(0.9)?;
    let set = sw.schedule_set()?;
    let q = QueueState::new(vec![4, 0, 1, 0, 6, 0, 2, 0, 3]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    println!("maxweight-1     {:?}", maxweight_alpha(&q, 1.0, set).sigma);
    println!("maxweight-2     {:?}", maxweight_alpha(&q, 2.0, set).sigma);
    for (alpha, g) in [(1.0, Utility::Log), (2.0, Utility::Power { beta: 0.5 })] {
        let obj = Objective::new(alpha, g)?;
        let a = alpha_g_policy(&q, &obj, set, &mut rng)?;
        println!("({alpha}, {g:?}) {:?}", a.sigma);
    }

    let tandem = Preset::Tandem2.build(0.9)?;
    let tset = tandem.schedule_set()?;
    let x = MultiHopState::new(vec![3, 5]);
    let bp = backpressure(&x, &tandem.net, tset);
    println!("backpressure    sigma {:?} xi {:?}", bp.sigma, bp.xi);
    let mut sel = ChaCha8Rng::seed_from_u64(2);
    let ps = proportional_scheduler(&x, &tandem.net, tset, &mut rng, &mut sel)?;
    println!("proportional    sigma {:?} xi {:?}", ps.sigma, ps.xi);
    Ok(())
}
