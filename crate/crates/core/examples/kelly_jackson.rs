//! Re-indexes the 3-route tree by (link, route) stations and compares the
//! two fluid models at two step sizes.

use switchsim::bench::Preset;
use switchsim::fluid::{kelly_to_jackson, lemma1_check, reduction_study};

fn main() -> switchsim::Result<()> {
    let r = lemma1_check(&[2.0, 1.0], 3.0)?;
    println!(
        "split x=(2,1) sigma=3: {:.6} = {:.6}, gamma {:?}",
        r.lhs, r.rhs, r.gamma
    );

    let b = Preset::Tree {
        d: 3,
        diameter: 4,
        routes: Some(3),
    }
    .build(0.9)?;
    let set = b.schedule_set()?;
    let jn = kelly_to_jackson(&b.net)?;
    println!(
        "{} stations, effective loads {:?}",
        jn.len(),
        jn.link_loads()
    );

    let x0 = vec![1.0 / jn.len() as f64; jn.len()];
    let s = reduction_study(&b.net, set, &x0, 1.0, 1e-2)?;
    println!(
        "sup diff {:.3e} at dt {}, {:.3e} at dt {}; order {:.4}",
        s.coarse.trajectory_sup_diff, s.coarse.dt, s.fine.trajectory_sup_diff, s.fine.dt, s.order
    );
    Ok(())
}
