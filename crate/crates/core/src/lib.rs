//! Simulation and fluid analysis of switched queueing networks under
//! (alpha, g)-switch, MaxWeight, BackPressure and Proportional Scheduler
//! policies.

pub mod bench;
pub mod error;
pub mod fluid;
pub mod model;
pub mod policy;
pub mod program;
pub mod sim;

pub use error::{Error, Result};
