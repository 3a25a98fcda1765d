//! Presets, queue-count reports and the experiment runner behind the CLI.

mod cli;
mod config;
mod presets;
mod report;

pub use cli::{exit_code, presets_listing, run, Outcome, RunArgs};
pub use config::{ArrivalsConfig, Config, FluidConfig, Mode, PresetConfig, Resolved};
pub use presets::{Built, Preset, DEFAULT_LOAD, MAX_IQ_PORTS, MAX_PRESET_ATOMS};
pub use report::{queue_count_report, NodeCounts, QueueCountReport};
