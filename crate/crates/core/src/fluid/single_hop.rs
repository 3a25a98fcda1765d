use serde::Serialize;

use super::{Check, FluidOptions};
use crate::error::{Error, Result};
use crate::model::{load_headroom, ScheduleSet};
use crate::program::{solve_weighted, MeanSchedule, Objective};

/// Sampled single-hop fluid path. Every integration step is recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidTrajectory {
    pub t: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    /// Service rate in force at each sample (`sigma*(q)`, or `a_bar` once the
    /// state has been absorbed at zero).
    pub sigma: Vec<Vec<f64>>,
    /// Unnormalized solver gap at each sample.
    pub gap: Vec<f64>,
    pub a_bar: Vec<f64>,
    /// First sampled time with `||q||_1 <= hit_tol`.
    pub hit_time: Option<f64>,
}

impl FluidTrajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn norm1(&self, i: usize) -> f64 {
        self.q[i].iter().sum()
    }
}

fn step_size(opts: &FluidOptions, mass: f64, t: f64) -> f64 {
    let mut h = opts.dt.min(opts.t_end - t);
    if opts.kappa.is_finite() {
        h = h.min(opts.kappa * mass);
    }
    h
}

/// Integrates `dq/dt = a_bar - sigma*(q)` with `sigma*` solved over the full
/// hull and zero queues dropped from the objective.
///
/// Explicit Euler with projection onto the nonnegative orthant. The step is
/// `min(dt, kappa * ||q||_1)` so that the scheme stays scale-free near the
/// origin; once `||q||_1 <= zero_snap` under an interior load the state is
/// set to zero and held there.
pub fn integrate_single_hop(
    q0: &[f64],
    a_bar: &[f64],
    obj: &Objective,
    set: &ScheduleSet,
    opts: &FluidOptions,
) -> Result<FluidTrajectory> {
    let n = set.dim();
    if q0.len() != n || a_bar.len() != n {
        return Err(Error::InvalidArgument(format!(
            "state and load need {n} components"
        )));
    }
    if q0.iter().chain(a_bar).any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidArgument(
            "initial state and load must be finite and nonnegative".into(),
        ));
    }
    opts.validate()?;
    let interior = load_headroom(a_bar, set)?.is_interior();

    let mut traj = FluidTrajectory {
        t: Vec::new(),
        q: Vec::new(),
        sigma: Vec::new(),
        gap: Vec::new(),
        a_bar: a_bar.to_vec(),
        hit_time: None,
    };
    let mut q = q0.to_vec();
    let mut t = 0.0;
    let mut absorbed = false;
    let mut warm: Option<MeanSchedule> = None;
    loop {
        let mass: f64 = q.iter().sum();
        if traj.hit_time.is_none() && mass <= opts.hit_tol {
            traj.hit_time = Some(t);
        }
        if interior && mass <= opts.zero_snap {
            absorbed = true;
            q.iter_mut().for_each(|x| *x = 0.0);
        }
        let (sigma, gap) =
            if absorbed {
                (a_bar.to_vec(), 0.0)
            } else {
                let w = obj.queue_weights(&q);
                let ms = solve_weighted(obj.utility, &w, set, &opts.solver, warm.as_ref())
                    .map_err(|e| Error::FluidSolver {
                        t,
                        source: Box::new(e),
                    })?;
                let out = (ms.s.clone(), ms.raw_gap());
                warm = Some(ms);
                out
            };
        traj.t.push(t);
        traj.q.push(q.clone());
        traj.sigma.push(sigma.clone());
        traj.gap.push(gap);
        if t >= opts.t_end {
            break;
        }
        let h = if absorbed {
            opts.dt.min(opts.t_end - t)
        } else {
            step_size(opts, mass, t)
        };
        if !absorbed {
            for ((qj, aj), sj) in q.iter_mut().zip(a_bar).zip(&sigma) {
                *qj = (*qj + h * (aj - sj)).max(0.0);
            }
        }
        t = if opts.t_end - t - h <= 1e-12 * opts.t_end.max(1.0) {
            opts.t_end
        } else {
            t + h
        };
    }
    Ok(traj)
}

/// `L(q) = sum_j g'(rho_j) q_j^(1+alpha) / (1+alpha)`.
pub fn lyapunov_l(q: &[f64], g_prime_rho: &[f64], alpha: f64) -> f64 {
    q.iter()
        .zip(g_prime_rho)
        .map(|(&x, &g)| g * x.powf(1.0 + alpha) / (1.0 + alpha))
        .sum()
}

/// Numerical check of the L-drift argument along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftCertificateL {
    pub epsilon: f64,
    pub rho: Vec<f64>,
    pub gamma: f64,
    /// `max_j g'(rho_j) / (1 + alpha)`: the maximum of `L` on the unit simplex.
    pub k: f64,
    /// Hitting-time bound `(1+alpha) K^(1/(1+alpha)) / (eps gamma^alpha)`.
    pub t_bound: f64,
    /// Envelope slope `eps gamma^alpha / (1 + alpha)`.
    pub envelope_rate: f64,
    pub hit_time: Option<f64>,
    /// Whether the inequality chain behind `gamma` applies to
    /// this `(alpha, g'(rho))`; informational.
    pub gamma_chain_valid: bool,
    /// `sum (a-sigma*) g'(rho) q^alpha <= -eps sum a g'(rho) q^alpha`, the
    /// inequality that follows from the tangent condition at `rho`.
    pub tangent_inequality: Check,
    /// Same with `-eps sum g'(rho) q^alpha` on the right; reported only.
    pub printed_inequality: Check,
    #[serde(rename = "L_envelope")]
    pub envelope: Check,
    #[serde(rename = "L_monotone")]
    pub monotone: Check,
    pub hitting: Check,
    pub samples: usize,
    #[serde(skip)]
    pub l_series: Vec<f64>,
    #[serde(skip)]
    pub envelope_series: Vec<f64>,
}

impl DriftCertificateL {
    pub fn passed(&self) -> bool {
        self.tangent_inequality.passed()
            && self.envelope.passed()
            && self.monotone.passed()
            && self.hitting.passed()
    }
}

pub const ENVELOPE_TOL: f64 = 1e-6;
pub const MONOTONE_TOL: f64 = 1e-8;

pub fn certify_l_drift(
    traj: &FluidTrajectory,
    obj: &Objective,
    a_bar: &[f64],
    set: &ScheduleSet,
) -> Result<DriftCertificateL> {
    if let Some(j) = a_bar.iter().position(|&a| !(a > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "the L certificate needs a positive load on every link (link #{j})"
        )));
    }
    let head = load_headroom(a_bar, set)?;
    if !head.is_interior() {
        return Err(Error::InvalidArgument(format!(
            "load is not interior (headroom {:.6})",
            head.epsilon
        )));
    }
    let eps = head.epsilon;
    let alpha = obj.alpha;
    let rho: Vec<f64> = a_bar.iter().map(|a| (1.0 + eps) * a).collect();
    let gp: Vec<f64> = rho.iter().map(|&r| obj.utility.deriv(r)).collect();
    let n = a_bar.len() as f64;
    let gamma = (1.0 + alpha).powf(1.0 / (1.0 + alpha)) / n;
    let k = gp.iter().fold(0.0_f64, |m, &g| m.max(g)) / (1.0 + alpha);
    let rate = eps * gamma.powf(alpha) / (1.0 + alpha);
    let t_bound = (1.0 + alpha) * k.powf(1.0 / (1.0 + alpha)) / (eps * gamma.powf(alpha));
    let gmin = gp.iter().fold(f64::INFINITY, |m, &g| m.min(g));
    let gmax = gp.iter().fold(0.0_f64, |m, &g| m.max(g));
    let gamma_chain_valid = gmin >= 1.0 && (alpha <= 1.0 || gmax <= 1.0);

    let p = 1.0 / (1.0 + alpha);
    let l_series: Vec<f64> = traj.q.iter().map(|q| lyapunov_l(q, &gp, alpha)).collect();
    let root0 = l_series.first().copied().unwrap_or(0.0).powf(p);
    let envelope_series: Vec<f64> = traj
        .t
        .iter()
        .map(|&t| (root0 - rate * t).max(0.0))
        .collect();

    let mut tangent = Check::Pass;
    let mut printed = Check::Pass;
    let mut envelope = Check::Pass;
    let mut monotone = Check::Pass;
    for i in 0..traj.len() {
        let t = traj.t[i];
        let q = &traj.q[i];
        if l_series[i].powf(p) > envelope_series[i] + ENVELOPE_TOL {
            envelope.fail_at(t);
        }
        if i + 1 < traj.len() {
            let h = traj.t[i + 1] - t;
            if l_series[i + 1] > l_series[i] + MONOTONE_TOL * h {
                monotone.fail_at(traj.t[i + 1]);
            }
        }
        if q.iter().all(|&x| x == 0.0) {
            continue;
        }
        let qa: Vec<f64> = q
            .iter()
            .map(|&x| if x > 0.0 { x.powf(alpha) } else { 0.0 })
            .collect();
        let lhs: f64 = (0..q.len())
            .map(|j| (a_bar[j] - traj.sigma[i][j]) * gp[j] * qa[j])
            .sum();
        let base: f64 = (0..q.len()).map(|j| gp[j] * qa[j]).sum();
        let weighted: f64 = (0..q.len()).map(|j| a_bar[j] * gp[j] * qa[j]).sum();
        let tol = 100.0 * traj.gap[i] + 1e-12 * base;
        if lhs > -eps * weighted + tol {
            tangent.fail_at(t);
        }
        if lhs > -eps * base + tol {
            printed.fail_at(t);
        }
    }
    let hitting = match traj.hit_time {
        Some(h) if h <= t_bound => {
            let stays = traj
                .t
                .iter()
                .zip(&traj.q)
                .filter(|(t, _)| **t >= h)
                .all(|(_, q)| q.iter().sum::<f64>() <= 1e-6);
            if stays {
                Check::Pass
            } else {
                Check::Fail { t: Some(h) }
            }
        }
        _ => Check::Fail { t: traj.hit_time },
    };
    Ok(DriftCertificateL {
        epsilon: eps,
        rho,
        gamma,
        k,
        t_bound,
        envelope_rate: rate,
        hit_time: traj.hit_time,
        gamma_chain_valid,
        tangent_inequality: tangent,
        printed_inequality: printed,
        envelope,
        monotone,
        hitting,
        samples: traj.len(),
        l_series,
        envelope_series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> ScheduleSet {
        ScheduleSet::from_atoms(1, vec![vec![0], vec![1]]).unwrap()
    }

    #[test]
    fn linear_drain() {
        let opts = FluidOptions::new(1e-3, 3.0);
        let tr = integrate_single_hop(&[1.0], &[0.5], &Objective::proportional(), &single(), &opts)
            .unwrap();
        for (t, q) in tr.t.iter().zip(&tr.q) {
            let exact = (1.0 - 0.5 * t).max(0.0);
            assert!((q[0] - exact).abs() < 1e-9, "t={t}: {} vs {exact}", q[0]);
        }
        let hit = tr.hit_time.unwrap();
        assert!((hit - 2.0).abs() < 1e-3);
    }

    #[test]
    fn zero_state_is_absorbing() {
        let set = ScheduleSet::from_atoms(2, vec![vec![0, 0], vec![1, 0], vec![0, 1]]).unwrap();
        let tr = integrate_single_hop(
            &[0.0, 0.0],
            &[0.3, 0.3],
            &Objective::proportional(),
            &set,
            &FluidOptions::new(1e-2, 1.0),
        )
        .unwrap();
        assert!(tr.q.iter().all(|q| q == &vec![0.0, 0.0]));
        assert_eq!(tr.hit_time, Some(0.0));
    }

    #[test]
    fn l_at_hand_values() {
        assert_eq!(lyapunov_l(&[0.0, 0.0], &[2.0, 2.0], 1.0), 0.0);
        // g = log, rho = (0.5, 0.5): g'(rho) = 2, L = 2 * (1/2) * 2
        assert!((lyapunov_l(&[1.0, 1.0], &[2.0, 2.0], 1.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn printed_inequality_fails_where_tangent_holds() {
        // simplex, a = (0.45, 0.45), q along rho: sigma* = rho = (0.5, 0.5)
        let set = ScheduleSet::from_atoms(2, vec![vec![0, 0], vec![1, 0], vec![0, 1]]).unwrap();
        let tr = FluidTrajectory {
            t: vec![0.0],
            q: vec![vec![0.5, 0.5]],
            sigma: vec![vec![0.5, 0.5]],
            gap: vec![0.0],
            a_bar: vec![0.45, 0.45],
            hit_time: None,
        };
        let c = certify_l_drift(&tr, &Objective::proportional(), &[0.45, 0.45], &set).unwrap();
        assert!(c.tangent_inequality.passed());
        assert!(!c.printed_inequality.passed());
    }
}
