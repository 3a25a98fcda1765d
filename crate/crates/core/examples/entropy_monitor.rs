//! Proportionally fair multihop fluid on the tandem preset, with the
//! relative-entropy Lyapunov function tracked along the trajectory.

use switchsim::bench::Preset;
use switchsim::fluid::{
    certify_h_drift, drift_floor_constants, grad_h_check, integrate_multihop, lyapunov_h,
    FluidOptions,
};
use switchsim::program::SolverOptions;

fn main() -> switchsim::Result<()> {
    let b = Preset::Tandem2.build(0.9)?;
    let set = b.schedule_set()?;
    let net = &b.net;
    let opts = SolverOptions::fluid();

    let x = [0.7, 0.3];
    let h = lyapunov_h(net, &x, set, &opts)?;
    let g = grad_h_check(net, &x, set, 1e-6, &opts)?;
    println!("H({x:?}) = {h:.6}, gradient error {:.2e}", g.max_rel_error);

    let traj = integrate_multihop(net, &[0.5, 0.5], set, &FluidOptions::new(1e-3, 40.0))?;
    let mon = certify_h_drift(net, &traj, set, 1e-6, &opts)?;
    println!(
        "hit {:?}, sup dH/dt {:.3e}, nonincreasing {}, strict {}",
        traj.hit_time,
        mon.sup_drift,
        mon.nonincreasing.as_str(),
        mon.strictly_negative.as_str()
    );
    let c = drift_floor_constants(net, set)?;
    println!(
        "drift floor constants: delta {:.4}, printed {:.4}, divided {:.4}",
        c.delta, c.printed, c.divided
    );
    Ok(())
}
