//! Slotted simulation of the two-link simplex under and over capacity.

use switchsim::bench::Preset;
use switchsim::policy::PolicyKind;
use switchsim::program::Objective;
use switchsim::sim::{run_experiment, ExperimentConfig};

fn main() -> switchsim::Result<()> {
    let cfg = ExperimentConfig {
        horizon: 200_000,
        stride: 200,
        seed: 11,
        ..ExperimentConfig::default()
    };
    for load in [0.9, 1.1] {
        let b = Preset::Simplex2.build(load)?;
        let (traj, diag) = run_experiment(
            &b.net,
            b.schedule_set()?,
            PolicyKind::AlphaG(Objective::proportional()),
            &cfg,
        )?;
        println!(
            "load {load}: final total {}, slope {:.4} (se {:.4}) -> {}",
            traj.final_total,
            diag.slope,
            diag.std_error,
            diag.verdict.as_str()
        );
    }
    Ok(())
}
