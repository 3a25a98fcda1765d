//! Integrates the single-hop fluid from a corner of the simplex and checks
//! the L drift certificate along the way.

use switchsim::bench::Preset;
use switchsim::fluid::{certify_l_drift, integrate_single_hop, FluidOptions};
use switchsim::program::Objective;

fn main() -> switchsim::Result<()> {
    let b = Preset::Simplex2.build(0.9)?;
    let set = b.schedule_set()?;
    let a_bar = b.net.link_loads().to_vec();
    let obj = Objective::proportional();
    let traj = integrate_single_hop(
        &[1.0, 0.0],
        &a_bar,
        &obj,
        set,
        &FluidOptions::new(1e-3, 40.0),
    )?;
    let cert = certify_l_drift(&traj, &obj, &a_bar, set)?;
    println!(
        "epsilon {:.4}, T bound {:.3}, hit {:?}",
        cert.epsilon, cert.t_bound, cert.hit_time
    );
    println!(
        "tangent {}, envelope {}, monotone {}, hitting {} (printed form: {})",
        cert.tangent_inequality.as_str(),
        cert.envelope.as_str(),
        cert.monotone.as_str(),
        cert.hitting.as_str(),
        cert.printed_inequality.as_str()
    );
    println!(
        "{}",
        if cert.passed() {
            "certified"
        } else {
            "not certified"
        }
    );
    Ok(())
}
