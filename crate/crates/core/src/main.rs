use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use switchsim::bench::{exit_code, presets_listing, run, Mode, RunArgs};

#[derive(Parser)]
#[command(
    name = "switchsim",
    version,
    about = "Switched queueing network simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config.
    Run {
        config: PathBuf,
        /// discrete, fluid, certify, reduce or report.
        #[arg(long)]
        mode: Option<String>,
        /// Output directory (default: next to the config).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        replicas: usize,
    },
    /// List built-in presets.
    Presets,
}

fn init_logging() -> Result<(), String> {
    let level = std::env::var("SWITCHSIM_LOG").unwrap_or_else(|_| "error".into());
    if !matches!(level.as_str(), "error" | "info" | "debug") {
        return Err(format!(
            "SWITCHSIM_LOG must be error, info or debug (got `{level}`)"
        ));
    }
    env_logger::Builder::new().parse_filters(&level).init();
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_logging() {
        eprintln!("switchsim: {e}");
        return ExitCode::from(2);
    }
    match cli.command {
        Command::Presets => {
            print!("{}", presets_listing());
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            mode,
            out,
            seed,
            replicas,
        } => {
            let mode = match mode.as_deref().map(Mode::parse).transpose() {
                Ok(m) => m,
                Err(e) => {
                    eprintln!("switchsim: {e}");
                    return ExitCode::from(2);
                }
            };
            let args = RunArgs {
                config,
                mode,
                out,
                seed,
                replicas,
            };
            let result = run(&args);
            match &result {
                Ok(o) => print!("{}", o.summary),
                Err(e) => eprintln!("switchsim: {e}"),
            }
            ExitCode::from(exit_code(&result) as u8)
        }
    }
}
