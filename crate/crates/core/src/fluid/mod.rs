//! Fluid models, Lyapunov certificates and the (link, route) reduction.

mod entropy;
mod jackson;
mod multihop;
mod single_hop;

pub use entropy::{
    certify_h_drift, drift_floor_constants, grad_h_check, grad_h_closed, h_drift_analytic,
    lyapunov_h, lyapunov_h_parts, pinsker_lower_bound, relative_entropy, DriftFloorConstants,
    EntropyMonitor, GradCheck, HParts,
};
pub use jackson::{
    integrate_jackson, jackson_rhs, kelly_to_jackson, lemma1_check, reduction_equivalence,
    reduction_study, station_program, JacksonNetwork, Lemma1Report, ReductionReport,
    ReductionStudy,
};
pub use multihop::{integrate_multihop, pf_rhs, MultiHopTrajectory};
pub use single_hop::{
    certify_l_drift, integrate_single_hop, lyapunov_l, DriftCertificateL, FluidTrajectory,
    ENVELOPE_TOL, MONOTONE_TOL,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::program::SolverOptions;

/// Below this link total, per-route shares are frozen and the link is
/// dropped from the objective. Scaled by the total mass once it falls
/// below 1, see [`share_floor`].
pub const SHARE_FLOOR: f64 = 1e-9;

/// `SHARE_FLOOR * min(1, mass)`.
pub(crate) fn share_floor(v: &[f64]) -> f64 {
    SHARE_FLOOR * v.iter().sum::<f64>().min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Step cap relative to the current mass; `INFINITY` gives fixed steps.
    pub kappa: f64,
    /// Mass below which an interior-load state is set to zero.
    pub zero_snap: f64,
    /// Mass at which the hitting time is recorded.
    pub hit_tol: f64,
    pub solver: SolverOptions,
}

impl FluidOptions {
    pub fn new(dt: f64, t_end: f64) -> Self {
        FluidOptions {
            dt,
            t_end,
            kappa: 0.05,
            zero_snap: 1e-12,
            hit_tol: 1e-6,
            solver: SolverOptions::fluid(),
        }
    }

    pub fn fixed_step(mut self) -> Self {
        self.kappa = f64::INFINITY;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive (got {})",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "t_end must be finite and nonnegative (got {})",
                self.t_end
            )));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::InvalidArgument("kappa must be positive".into()));
        }
        Ok(())
    }
}

impl Default for FluidOptions {
    fn default() -> Self {
        FluidOptions::new(1e-3, 10.0)
    }
}

/// Outcome of one certificate clause; a failure carries the first time at
/// which it was seen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Check {
    Pass,
    Fail { t: Option<f64> },
}

impl Check {
    pub fn passed(&self) -> bool {
        matches!(self, Check::Pass)
    }

    pub(crate) fn fail_at(&mut self, t: f64) {
        if self.passed() {
            *self = Check::Fail { t: Some(t) };
        }
    }

    pub fn as_str(&self) -> &'static str {
        if self.passed() {
            "pass"
        } else {
            "fail"
        }
    }
}

impl Serialize for Check {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}
