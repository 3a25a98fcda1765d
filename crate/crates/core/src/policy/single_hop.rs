use rand::Rng;

use super::ServiceAction;
use crate::error::Result;
use crate::model::{QueueState, ScheduleSet};
use crate::program::{
    capped_linear_oracle, caratheodory_decompose, sample_schedule, solve_program,
    solve_program_warm, MeanSchedule, Objective, SolverOptions,
};

fn as_f64(q: &[u64]) -> Vec<f64> {
    q.iter().map(|&x| x as f64).collect()
}

/// MaxWeight-alpha: the oracle vertex of `S_Q` for weights `Q^alpha`.
pub fn maxweight_alpha(q: &QueueState, alpha: f64, set: &ScheduleSet) -> ServiceAction {
    let w: Vec<f64> =
        q.q.iter()
            .map(|&x| if x > 0 { (x as f64).powf(alpha) } else { 0.0 })
            .collect();
    let sigma = capped_linear_oracle(&w, &q.q, set);
    ServiceAction {
        sigma: sigma.into_iter().map(u64::from).collect(),
        xi: Vec::new(),
    }
}

/// The (alpha, g)-switch policy: solve over `<S_Q>`, decompose, sample.
pub fn alpha_g_policy<R: Rng + ?Sized>(
    q: &QueueState,
    obj: &Objective,
    set: &ScheduleSet,
    rng: &mut R,
) -> Result<ServiceAction> {
    alpha_g_step(q, obj, set, rng, &SolverOptions::default(), None).map(|(a, _)| a)
}

/// As [`alpha_g_policy`], optionally warm-started; also returns the solver
/// output so the caller can warm-start the next slot.
pub fn alpha_g_step<R: Rng + ?Sized>(
    q: &QueueState,
    obj: &Objective,
    set: &ScheduleSet,
    rng: &mut R,
    opts: &SolverOptions,
    warm: Option<&MeanSchedule>,
) -> Result<(ServiceAction, Option<MeanSchedule>)> {
    if q.q.iter().all(|&x| x == 0) {
        return Ok((ServiceAction::idle(q.q.len()), None));
    }
    let truncated = set.truncate(&q.q);
    let qf = as_f64(&q.q);
    let ms = match warm {
        Some(w) => solve_program_warm(obj, &qf, &truncated, opts, w)?,
        None => solve_program(obj, &qf, &truncated, opts)?,
    };
    let d = caratheodory_decompose(&ms, &truncated)?;
    let sigma = sample_schedule(&d, rng)
        .iter()
        .map(|&x| u64::from(x))
        .collect();
    let ms = MeanSchedule {
        support: d.atoms().to_vec(),
        ..ms
    };
    Ok((
        ServiceAction {
            sigma,
            xi: Vec::new(),
        },
        Some(ms),
    ))
}
