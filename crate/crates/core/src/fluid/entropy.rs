use serde::Serialize;

use super::multihop::MultiHopTrajectory;
use super::Check;
use crate::error::{Error, Result};
use crate::model::{load_headroom, Network, ScheduleSet};
use crate::program::{solve_weighted, MeanSchedule, SolverOptions, Utility};

/// `sum_x p_x log(p_x / q_x)`, with `0 log 0 = 0`.
pub fn relative_entropy(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / b).ln())
        .sum()
}

/// `(sum |p - q|)^2 / (2 sum p)` for positive vectors of equal sum: the
/// Pinsker lower bound on [`relative_entropy`], with the factor 1/2.
pub fn pinsker_lower_bound(p: &[f64], q: &[f64]) -> f64 {
    let l1: f64 = p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum();
    let total: f64 = p.iter().sum();
    l1 * l1 / (2.0 * total)
}

fn pf_solution(
    q: &[f64],
    set: &ScheduleSet,
    opts: &SolverOptions,
    warm: Option<&MeanSchedule>,
) -> Result<MeanSchedule> {
    solve_weighted(Utility::Log, q, set, opts, warm)
}

/// The two pieces of `H`: per-link relative entropy of route shares against
/// rate shares, and `sum_j q_j log(sigma*_j / a_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HParts {
    pub h: f64,
    pub entropy: f64,
    pub pf: f64,
}

fn h_terms(net: &Network, x: &[f64], sigma: &[f64]) -> Result<HParts> {
    let rates = net.route_rates();
    let q = net.link_totals(x);
    let mut h = 0.0;
    for (s, st) in net.stations().iter().enumerate() {
        if x[s] <= 0.0 {
            continue;
        }
        let a = rates[st.route];
        if a <= 0.0 {
            return Err(Error::ZeroRouteRate {
                route: net.routes()[st.route].id.clone(),
            });
        }
        h += x[s] * (x[s] * sigma[st.link] / (q[st.link] * a)).ln();
    }
    let loads = net.link_loads();
    let pf: f64 = (0..q.len())
        .filter(|&j| q[j] > 0.0)
        .map(|j| q[j] * (sigma[j] / loads[j]).ln())
        .sum();
    Ok(HParts {
        h,
        entropy: h - pf,
        pf,
    })
}

/// `H(x) = sum_r sum_{j in r} x_jr log(x_jr sigma*_j(q) / (q_j a_r))`.
pub fn lyapunov_h(
    net: &Network,
    x: &[f64],
    set: &ScheduleSet,
    opts: &SolverOptions,
) -> Result<f64> {
    Ok(lyapunov_h_parts(net, x, set, opts)?.h)
}

pub fn lyapunov_h_parts(
    net: &Network,
    x: &[f64],
    set: &ScheduleSet,
    opts: &SolverOptions,
) -> Result<HParts> {
    if x.iter().all(|&v| v == 0.0) {
        return Ok(HParts {
            h: 0.0,
            entropy: 0.0,
            pf: 0.0,
        });
    }
    let q = net.link_totals(x);
    let ms = pf_solution(&q, set, opts, None)?;
    h_terms(net, x, &ms.s)
}

/// `log(x_jr sigma*_j / (q_j a_r))` per station.
pub fn grad_h_closed(net: &Network, x: &[f64], sigma: &[f64]) -> Vec<f64> {
    let rates = net.route_rates();
    let q = net.link_totals(x);
    net.stations()
        .iter()
        .enumerate()
        .map(|(s, st)| (x[s] * sigma[st.link] / (q[st.link] * rates[st.route])).ln())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheck {
    pub closed: Vec<f64>,
    pub finite_difference: Vec<f64>,
    /// `max |fd - closed| / max(|closed|, 1)`.
    pub max_rel_error: f64,
}

/// Central differences of `H` against the closed-form partials.
pub fn grad_h_check(
    net: &Network,
    x: &[f64],
    set: &ScheduleSet,
    h: f64,
    opts: &SolverOptions,
) -> Result<GradCheck> {
    if x.iter().any(|&v| !(v > h)) {
        return Err(Error::InvalidArgument(
            "gradient check needs every x_jr > h".into(),
        ));
    }
    let q = net.link_totals(x);
    let sigma = pf_solution(&q, set, opts, None)?.s;
    let closed = grad_h_closed(net, x, &sigma);
    let mut fd = Vec::with_capacity(x.len());
    for s in 0..x.len() {
        let mut up = x.to_vec();
        up[s] += h;
        let mut down = x.to_vec();
        down[s] -= h;
        let hu = lyapunov_h(net, &up, set, opts)?;
        let hd = lyapunov_h(net, &down, set, opts)?;
        fd.push((hu - hd) / (2.0 * h));
    }
    let max_rel_error = closed
        .iter()
        .zip(&fd)
        .map(|(c, f)| (f - c).abs() / c.abs().max(1.0))
        .fold(0.0, f64::max);
    Ok(GradCheck {
        closed,
        finite_difference: fd,
        max_rel_error,
    })
}

/// `dH/dt = -sum_r a_r sum_{k=0..K} u_k log(u_k / u_{k+1})` along the
/// proportionally fair fluid, with `u_k = x sigma* / (q a_r)` at hop `k` and
/// `u_0 = u_{K+1} = 1`.
pub fn h_drift_analytic(net: &Network, x: &[f64], sigma: &[f64]) -> f64 {
    let rates = net.route_rates();
    let q = net.link_totals(x);
    let mut total = 0.0;
    for (r, route) in net.routes().iter().enumerate() {
        let a = rates[r];
        if a <= 0.0 {
            continue;
        }
        let mut u = vec![1.0];
        for &s in net.route_stations(r) {
            let j = net.stations()[s].link;
            u.push(if q[j] > 0.0 {
                x[s] * sigma[j] / (q[j] * a)
            } else {
                0.0
            });
        }
        u.push(1.0);
        let _ = route;
        let sum: f64 = (0..u.len() - 1)
            .filter(|&k| u[k] > 0.0)
            .map(|k| u[k] * (u[k] / u[k + 1]).ln())
            .sum();
        total -= a * sum;
    }
    total
}

/// The closing constant of the strict-drift lemma, in its printed form and
/// with `sigma_max` dividing instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftFloorConstants {
    pub delta: f64,
    pub longest_route: usize,
    pub sigma_max: u32,
    pub printed: f64,
    pub divided: f64,
}

pub fn drift_floor_constants(net: &Network, set: &ScheduleSet) -> Result<DriftFloorConstants> {
    let delta = load_headroom(net.link_loads(), set)?.epsilon;
    let longest_route = net
        .routes()
        .iter()
        .map(|r| r.links.len())
        .max()
        .unwrap_or(1);
    let base = (delta / (longest_route * longest_route) as f64).powi(2);
    let sigma_max = set.sigma_max();
    Ok(DriftFloorConstants {
        delta,
        longest_route,
        sigma_max,
        printed: base * f64::from(sigma_max),
        divided: base / f64::from(sigma_max),
    })
}

/// `H` along a multihop trajectory and its measured drift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyMonitor {
    /// Drift must satisfy `dH/dt < -floor` at every sample with `q != 0`.
    pub floor: f64,
    /// Largest measured `dH/dt` over samples with `q != 0`; its negation is
    /// the observed drift floor.
    pub sup_drift: f64,
    pub nonincreasing: Check,
    pub strictly_negative: Check,
    /// Largest gap between the differenced and the analytic drift.
    pub max_analytic_mismatch: f64,
    pub drift_floor: DriftFloorConstants,
    #[serde(skip)]
    pub h_series: Vec<f64>,
    #[serde(skip)]
    pub drift_series: Vec<f64>,
    #[serde(skip)]
    pub analytic_series: Vec<f64>,
}

impl EntropyMonitor {
    pub fn passed(&self) -> bool {
        self.nonincreasing.passed() && self.strictly_negative.passed()
    }
}

/// Evaluates `H` at every sample (re-solving `sigma*` with every nonempty
/// link in the objective) and checks that its forward differences are
/// strictly below `-floor` wherever the state is nonzero.
pub fn certify_h_drift(
    net: &Network,
    traj: &MultiHopTrajectory,
    set: &ScheduleSet,
    floor: f64,
    opts: &SolverOptions,
) -> Result<EntropyMonitor> {
    let drift_floor = drift_floor_constants(net, set)?;
    if !(drift_floor.delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "load is not interior (headroom {:.6})",
            drift_floor.delta
        )));
    }
    let mut h_series = Vec::with_capacity(traj.len());
    let mut analytic_series = Vec::with_capacity(traj.len());
    let mut warm: Option<MeanSchedule> = None;
    for x in &traj.x {
        if x.iter().all(|&v| v == 0.0) {
            h_series.push(0.0);
            analytic_series.push(0.0);
            continue;
        }
        let q = net.link_totals(x);
        let ms = pf_solution(&q, set, opts, warm.as_ref())?;
        h_series.push(h_terms(net, x, &ms.s)?.h);
        analytic_series.push(h_drift_analytic(net, x, &ms.s));
        warm = Some(ms);
    }
    let mut drift_series = vec![0.0; traj.len()];
    let mut sup_drift = f64::NEG_INFINITY;
    let mut nonincreasing = Check::Pass;
    let mut strictly_negative = Check::Pass;
    let mut max_analytic_mismatch: f64 = 0.0;
    for i in 0..traj.len().saturating_sub(1) {
        let h = traj.t[i + 1] - traj.t[i];
        let d = (h_series[i + 1] - h_series[i]) / h;
        drift_series[i] = d;
        if traj.x[i].iter().all(|&v| v == 0.0) {
            continue;
        }
        sup_drift = sup_drift.max(d);
        if h_series[i + 1] > h_series[i] {
            nonincreasing.fail_at(traj.t[i + 1]);
        }
        if !(d < -floor) {
            strictly_negative.fail_at(traj.t[i]);
        }
        if traj.x[i + 1].iter().any(|&v| v > 0.0) {
            max_analytic_mismatch = max_analytic_mismatch.max((d - analytic_series[i]).abs());
        }
    }
    Ok(EntropyMonitor {
        floor,
        sup_drift,
        nonincreasing,
        strictly_negative,
        max_analytic_mismatch,
        drift_floor,
        h_series,
        drift_series,
        analytic_series,
    })
}
