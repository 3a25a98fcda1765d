//! Slotted-time simulation of single-hop and multihop dynamics.

mod diagnostic;
mod dynamics;

pub use diagnostic::{diagnose, trend, DiagnosticThresholds, StabilityDiagnostic, Verdict};
pub use dynamics::{
    apply_multihop, apply_single_hop, link_arrivals, station_arrivals, step_multihop,
    step_single_hop,
};

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ArrivalKind, ArrivalProcess, MultiHopState, Network, QueueState, ScheduleSet};
use crate::policy::{Policy, PolicyKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub horizon: u64,
    pub stride: u64,
    pub seed: u64,
    pub arrivals: ArrivalKind,
    pub batch: u32,
    pub thresholds: DiagnosticThresholds,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            horizon: 100_000,
            stride: 100,
            seed: 0,
            arrivals: ArrivalKind::Bernoulli,
            batch: 1,
            thresholds: DiagnosticThresholds::default(),
        }
    }
}

/// Recorded samples of a run plus packet accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub link_ids: Vec<String>,
    pub slots: Vec<u64>,
    pub totals: Vec<u64>,
    /// Per-link queue lengths at each recorded slot.
    pub queues: Vec<Vec<u64>>,
    pub initial: u64,
    pub arrived: u64,
    pub departed: u64,
    pub final_total: u64,
    /// Slots on which the queue update identity was verified.
    pub slots_checked: u64,
}

impl Trajectory {
    fn new(link_ids: Vec<String>, initial: u64) -> Self {
        Trajectory {
            link_ids,
            slots: Vec::new(),
            totals: Vec::new(),
            queues: Vec::new(),
            initial,
            arrived: 0,
            departed: 0,
            final_total: initial,
            slots_checked: 0,
        }
    }

    fn record(&mut self, slot: u64, q: Vec<u64>) {
        self.slots.push(slot);
        self.totals.push(q.iter().sum());
        self.queues.push(q);
    }

    /// `departed + in system == arrived + initial`.
    pub fn packets_conserved(&self) -> bool {
        self.departed + self.final_total == self.arrived + self.initial
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("slot,total_queue");
        for id in &self.link_ids {
            out.push_str(",q_");
            out.push_str(id);
        }
        out.push('\n');
        for ((slot, total), q) in self.slots.iter().zip(&self.totals).zip(&self.queues) {
            let _ = write!(out, "{slot},{total}");
            for v in q {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Runs one replica from the empty state.
///
/// Per-route queues are simulated when the policy needs them
/// (BackPressure, Proportional Scheduler); otherwise link queues.
pub fn run_experiment(
    net: &Network,
    set: &ScheduleSet,
    kind: PolicyKind,
    cfg: &ExperimentConfig,
) -> Result<(Trajectory, StabilityDiagnostic)> {
    if cfg.horizon == 0 {
        return Err(Error::EmptyHorizon);
    }
    if cfg.stride == 0 {
        return Err(Error::InvalidArgument("stride must be positive".into()));
    }
    let mut arrivals = ArrivalProcess::new(cfg.arrivals, &net.route_rates(), cfg.batch, cfg.seed)?;
    let mut policy = Policy::new(kind, cfg.seed);
    let mut traj = Trajectory::new(net.link_ids(), 0);
    let record = |t: u64| t % cfg.stride == 0 || t == cfg.horizon;

    if kind.is_multihop() {
        let mut x = MultiHopState::empty(net);
        traj.record(0, x.link_queues(net));
        for t in 1..=cfg.horizon {
            let (next, _, a, out) = step_multihop(&x, &mut policy, net, set, &mut arrivals)?;
            traj.arrived += a.iter().sum::<u64>();
            traj.departed += out;
            traj.slots_checked += 1;
            x = next;
            if record(t) {
                traj.record(t, x.link_queues(net));
            }
        }
        traj.final_total = x.total();
    } else {
        if !net.is_single_hop() {
            return Err(Error::PolicyMismatch {
                policy: kind.name(),
                reason: "routes longer than one hop need backpressure or proportional".into(),
            });
        }
        let mut q = QueueState::empty(net.num_links());
        traj.record(0, q.q.clone());
        for t in 1..=cfg.horizon {
            let (next, action, a) = step_single_hop(&q, &mut policy, net, set, &mut arrivals)?;
            traj.arrived += a.iter().sum::<u64>();
            traj.departed += action.sigma.iter().sum::<u64>();
            traj.slots_checked += 1;
            q = next;
            if record(t) {
                traj.record(t, q.q.clone());
            }
        }
        traj.final_total = q.total();
    }
    if !traj.packets_conserved() {
        return Err(Error::Conservation {
            slot: cfg.horizon,
            detail: "packet totals do not balance".into(),
        });
    }
    let rate: f64 = net.route_rates().iter().sum();
    let diag = diagnose(&traj.slots, &traj.totals, cfg.horizon, rate, cfg.thresholds);
    Ok((traj, diag))
}
