use rand::Rng;

use super::single_hop::alpha_g_step;
use super::ServiceAction;
use crate::error::Result;
use crate::model::{MultiHopState, Network, QueueState, ScheduleSet};
use crate::program::{MeanSchedule, Objective, SolverOptions};

/// Draws `k` items uniformly without replacement from an urn holding
/// `counts[i]` items of class `i`; returns the per-class draw counts.
///
/// Sequential draws, so the result is exactly multivariate hypergeometric.
pub fn hypergeometric_draw<R: Rng + ?Sized>(counts: &[u64], k: u64, rng: &mut R) -> Vec<u64> {
    let mut left: Vec<u64> = counts.to_vec();
    let mut total: u64 = left.iter().sum();
    assert!(k <= total, "cannot draw {k} of {total}");
    let mut out = vec![0; counts.len()];
    if k == total {
        return left;
    }
    for _ in 0..k {
        let mut u = rng.random_range(0..total);
        for (i, c) in left.iter_mut().enumerate() {
            if u < *c {
                *c -= 1;
                out[i] += 1;
                break;
            }
            u -= *c;
        }
        total -= 1;
    }
    out
}

/// Proportional Scheduler.
///
/// The link schedule is the (1, log) policy on the link totals `Q_j`; the
/// packets served at each link are a uniform random subset of those present.
pub fn proportional_scheduler<R: Rng + ?Sized, S: Rng + ?Sized>(
    x: &MultiHopState,
    net: &Network,
    set: &ScheduleSet,
    sched_rng: &mut R,
    select_rng: &mut S,
) -> Result<ServiceAction> {
    proportional_step(
        x,
        net,
        set,
        sched_rng,
        select_rng,
        &SolverOptions::default(),
        None,
    )
    .map(|(a, _)| a)
}

pub fn proportional_step<R: Rng + ?Sized, S: Rng + ?Sized>(
    x: &MultiHopState,
    net: &Network,
    set: &ScheduleSet,
    sched_rng: &mut R,
    select_rng: &mut S,
    opts: &SolverOptions,
    warm: Option<&MeanSchedule>,
) -> Result<(ServiceAction, Option<MeanSchedule>)> {
    let q = QueueState::new(x.link_queues(net));
    let (link_action, ms) =
        alpha_g_step(&q, &Objective::proportional(), set, sched_rng, opts, warm)?;
    let mut action = ServiceAction::idle_multihop(net);
    for (j, &sj) in link_action.sigma.iter().enumerate() {
        action.sigma[j] = sj;
        if sj == 0 {
            continue;
        }
        let stations = net.link_stations(j);
        let counts: Vec<u64> = stations.iter().map(|&s| x.x[s]).collect();
        let drawn = hypergeometric_draw(&counts, sj, select_rng);
        for (&s, d) in stations.iter().zip(drawn) {
            action.xi[s] = d;
        }
    }
    Ok((action, ms))
}
