//! Writes a config file and runs it the way `switchsim run` does.

use switchsim::bench::{run, Mode, RunArgs};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("switchsim-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("simplex.json");
    let config = r#"{
  "preset": {"name": "simplex2", "load": 0.9},
  "policy": "alpha_g", "alpha": 1, "g": "log",
  "horizon": 20000, "stride": 100,
  "arrivals": {"kind": "bernoulli", "seed": 3},
  "fluid": {"dt": 0.001, "t_end": 30}
}"#;
    std::fs::write(&path, config)?;

    for mode in [Mode::Discrete, Mode::Certify] {
        let mut args = RunArgs::new(&path);
        args.mode = Some(mode);
        let out = run(&args)?;
        print!("{}", out.summary);
        for f in &out.files {
            println!("  wrote {}", f.display());
        }
    }
    Ok(())
}
