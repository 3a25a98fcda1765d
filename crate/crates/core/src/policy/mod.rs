//! Slot-level scheduling policies.

mod action;
mod backpressure;
mod proportional;
mod single_hop;

pub use action::ServiceAction;
pub use backpressure::{backpressure, backpressure_weights, BackPressureWeights};
pub use proportional::{hypergeometric_draw, proportional_scheduler, proportional_step};
pub use single_hop::{alpha_g_policy, alpha_g_step, maxweight_alpha};

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{stream_rng, MultiHopState, Network, QueueState, ScheduleSet, Stream};
use crate::program::{MeanSchedule, Objective, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    MaxWeightAlpha { alpha: f64 },
    AlphaG(Objective),
    BackPressure,
    Proportional,
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::MaxWeightAlpha { .. } => "maxweight_alpha",
            PolicyKind::AlphaG(_) => "alpha_g",
            PolicyKind::BackPressure => "backpressure",
            PolicyKind::Proportional => "proportional",
        }
    }

    /// True for policies that track packets per (link, route).
    pub fn is_multihop(&self) -> bool {
        matches!(self, PolicyKind::BackPressure | PolicyKind::Proportional)
    }
}

/// A policy together with its random streams and warm-start memory.
#[derive(Debug, Clone)]
pub struct Policy {
    kind: PolicyKind,
    opts: SolverOptions,
    warm: Option<MeanSchedule>,
    sched_rng: ChaCha8Rng,
    select_rng: ChaCha8Rng,
}

impl Policy {
    pub fn new(kind: PolicyKind, seed: u64) -> Self {
        Policy {
            kind,
            opts: SolverOptions::default(),
            warm: None,
            sched_rng: stream_rng(seed, Stream::Scheduler),
            select_rng: stream_rng(seed, Stream::Selection),
        }
    }

    pub fn with_options(mut self, opts: SolverOptions) -> Self {
        self.opts = opts;
        self
    }

    pub fn kind(&self) -> &PolicyKind {
        &self.kind
    }

    pub fn decide_single_hop(
        &mut self,
        q: &QueueState,
        set: &ScheduleSet,
    ) -> Result<ServiceAction> {
        match self.kind {
            PolicyKind::MaxWeightAlpha { alpha } => Ok(maxweight_alpha(q, alpha, set)),
            PolicyKind::AlphaG(obj) => {
                let (a, ms) = alpha_g_step(
                    q,
                    &obj,
                    set,
                    &mut self.sched_rng,
                    &self.opts,
                    self.warm.as_ref(),
                )?;
                if ms.is_some() {
                    self.warm = ms;
                }
                Ok(a)
            }
            _ => Err(Error::PolicyMismatch {
                policy: self.kind.name(),
                reason: "needs per-route queues; run it on the multihop dynamics".into(),
            }),
        }
    }

    pub fn decide_multihop(
        &mut self,
        x: &MultiHopState,
        net: &Network,
        set: &ScheduleSet,
    ) -> Result<ServiceAction> {
        match self.kind {
            PolicyKind::BackPressure => Ok(backpressure(x, net, set)),
            PolicyKind::Proportional => {
                let (a, ms) = proportional_step(
                    x,
                    net,
                    set,
                    &mut self.sched_rng,
                    &mut self.select_rng,
                    &self.opts,
                    self.warm.as_ref(),
                )?;
                if ms.is_some() {
                    self.warm = ms;
                }
                Ok(a)
            }
            _ => Err(Error::PolicyMismatch {
                policy: self.kind.name(),
                reason: "is defined on link queues only; use a single-hop network".into(),
            }),
        }
    }
}
