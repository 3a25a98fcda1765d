use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::multihop::{integrate_multihop, pf_rhs_with_sigma};
use super::{share_floor, FluidOptions};
use crate::error::{Error, Result};
use crate::model::{Network, ScheduleSet};
use crate::program::frank_wolfe::{pairwise_fw, Active, VertexOracle};
use crate::program::{linear_oracle, SolverOptions, Utility};

/// Single-class network over stations `(j, r)` with deterministic routing.
///
/// Station order matches [`Network::stations`], so state vectors carry over
/// unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct JacksonNetwork {
    /// `(link, route)` per station.
    pub stations: Vec<(usize, usize)>,
    pub num_links: usize,
    /// `p[(s, s')] = 1` iff `s'` is the next hop of `s`.
    pub p: DMatrix<f64>,
    /// External arrival rate per station.
    pub a: Vec<f64>,
    /// Effective load `(I - P^T)^{-1} a`.
    pub a_bar: Vec<f64>,
}

impl JacksonNetwork {
    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }

    pub fn next(&self, s: usize) -> Option<usize> {
        (0..self.len()).find(|&t| self.p[(s, t)] > 0.0)
    }

    pub fn link_stations(&self, j: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&s| self.stations[s].0 == j)
            .collect()
    }

    /// `sum_{s at j} a_bar_s` per link.
    pub fn link_loads(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.num_links];
        for (s, &(j, _)) in self.stations.iter().enumerate() {
            out[j] += self.a_bar[s];
        }
        out
    }

    pub fn link_totals(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_links];
        for (s, &(j, _)) in self.stations.iter().enumerate() {
            out[j] += x[s];
        }
        out
    }
}

pub fn kelly_to_jackson(net: &Network) -> Result<JacksonNetwork> {
    let n = net.stations().len();
    let rates = net.route_rates();
    let mut p = DMatrix::zeros(n, n);
    let mut a = vec![0.0; n];
    for s in 0..n {
        if let Some(t) = net.next_station(s) {
            p[(s, t)] = 1.0;
        }
        if net.prev_station(s).is_none() {
            a[s] = rates[net.stations()[s].route];
        }
    }
    let m = DMatrix::identity(n, n) - p.transpose();
    let a_bar = m
        .lu()
        .solve(&DVector::from_column_slice(&a))
        .ok_or_else(|| Error::InvalidArgument("routing matrix is not transient".into()))?;
    Ok(JacksonNetwork {
        stations: net
            .stations()
            .iter()
            .map(|st| (st.link, st.route))
            .collect(),
        num_links: net.num_links(),
        p,
        a,
        a_bar: a_bar.iter().copied().collect(),
    })
}

struct StationOracle<'a> {
    set: &'a ScheduleSet,
    /// Stations at each link, in index order.
    at_link: Vec<Vec<usize>>,
    n: usize,
}

impl VertexOracle for StationOracle<'_> {
    /// Atom index and the station chosen at each link.
    type Key = (usize, Vec<usize>);

    fn best(&self, grad: &[f64]) -> (Self::Key, Vec<f64>) {
        let mut w = vec![0.0; self.at_link.len()];
        let mut pick = vec![usize::MAX; self.at_link.len()];
        for (j, st) in self.at_link.iter().enumerate() {
            for &s in st {
                if pick[j] == usize::MAX || grad[s] > w[j] {
                    w[j] = grad[s];
                    pick[j] = s;
                }
            }
        }
        let k = linear_oracle(&w, self.set);
        let atom = &self.set.atoms()[k];
        let mut point = vec![0.0; self.n];
        for (j, s) in pick.iter_mut().enumerate() {
            if atom[j] > 0 && *s != usize::MAX {
                point[*s] = f64::from(atom[j]);
            } else {
                *s = usize::MAX;
            }
        }
        ((k, pick), point)
    }
}

type StationVertex = Active<(usize, Vec<usize>)>;

/// Active set of a station-level solve, reusable as a warm start.
#[derive(Debug, Clone, Default)]
pub(crate) struct StationWarm(Vec<StationVertex>);

/// For each positive-weight station, the first atom with the largest
/// service on its link, routed to that station (other links go to their
/// first positive-weight station).
fn covering_vertex(
    oracle: &StationOracle<'_>,
    c: &[f64],
    s: usize,
    link: usize,
) -> Option<StationVertex> {
    let (k, best) = oracle
        .set
        .atoms()
        .iter()
        .enumerate()
        .fold(
            (0, 0),
            |acc, (k, a)| if a[link] > acc.1 { (k, a[link]) } else { acc },
        );
    if best == 0 {
        return None;
    }
    let atom = &oracle.set.atoms()[k];
    let mut pick = vec![usize::MAX; oracle.at_link.len()];
    let mut point = vec![0.0; oracle.n];
    for (j, st) in oracle.at_link.iter().enumerate() {
        if atom[j] == 0 {
            continue;
        }
        let chosen = if j == link {
            Some(s)
        } else {
            st.iter().copied().find(|&t| c[t] > 0.0)
        };
        if let Some(t) = chosen {
            pick[j] = t;
            point[t] = f64::from(atom[j]);
        }
    }
    Some(Active {
        key: (k, pick),
        point,
        weight: 0.0,
    })
}

fn solve_stations(
    jn: &JacksonNetwork,
    x: &[f64],
    set: &ScheduleSet,
    opts: &SolverOptions,
    warm: Option<&StationWarm>,
) -> Result<(Vec<f64>, StationWarm)> {
    let n = jn.len();
    let floor = share_floor(x);
    let w: Vec<f64> = x
        .iter()
        .map(|&v| if v > 0.0 && v >= floor { v } else { 0.0 })
        .collect();
    let scale: f64 = w.iter().sum();
    if scale == 0.0 {
        return Ok((vec![0.0; n], StationWarm::default()));
    }
    let c: Vec<f64> = w.iter().map(|v| v / scale).collect();
    let at_link: Vec<Vec<usize>> = (0..jn.num_links).map(|j| jn.link_stations(j)).collect();
    let oracle = StationOracle { set, at_link, n };

    let mut start: Vec<StationVertex> = warm
        .map(|w| w.0.iter().filter(|a| a.weight > 0.0).cloned().collect())
        .unwrap_or_default();
    let cold = start.is_empty();
    for s in 0..n {
        if c[s] <= 0.0 || start.iter().any(|a| a.weight > 0.0 && a.point[s] > 0.0) {
            continue;
        }
        let link = jn.stations[s].0;
        let v = covering_vertex(&oracle, &c, s, link).ok_or(Error::NoPositiveStart { link })?;
        if cold {
            start.push(v);
        } else {
            start.iter_mut().for_each(|a| a.weight *= 0.99);
            let mut v = v;
            v.weight = 0.01;
            start.push(v);
        }
    }
    if cold {
        let uniform = 1.0 / start.len() as f64;
        start.iter_mut().for_each(|a| a.weight = uniform);
    } else {
        let total: f64 = start.iter().map(|a| a.weight).sum();
        start.iter_mut().for_each(|a| a.weight /= total);
    }

    let r = pairwise_fw(&oracle, Utility::Log, &c, start, opts.tol, opts.max_iters);
    let gamma =
        r.s.iter()
            .zip(&c)
            .map(|(&g, &cs)| if cs > 0.0 { g } else { 0.0 })
            .collect();
    Ok((gamma, StationWarm(r.active)))
}

/// Station-level proportionally fair rates: maximizes
/// `sum_s x_s log gamma_s` subject to `(sum_{s at j} gamma_s)_j in <set>`.
///
/// Stations below the share floor get zero weight and rate 0.
pub fn station_program(
    jn: &JacksonNetwork,
    x: &[f64],
    set: &ScheduleSet,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    Ok(solve_stations(jn, x, set, opts, None)?.0)
}

/// Solver tolerance for both sides of the reduction comparison.
pub const REDUCTION_TOL: f64 = 1e-12;

/// `a_s + sum_{s'} P[s', s] gamma_{s'} - gamma_s`.
pub fn jackson_rhs(
    jn: &JacksonNetwork,
    x: &[f64],
    set: &ScheduleSet,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let gamma = station_program(jn, x, set, opts)?;
    Ok(jackson_rhs_with_gamma(jn, &gamma))
}

fn jackson_rhs_with_gamma(jn: &JacksonNetwork, gamma: &[f64]) -> Vec<f64> {
    let inflow = jn.p.transpose() * DVector::from_column_slice(gamma);
    (0..jn.len())
        .map(|s| jn.a[s] + inflow[s] - gamma[s])
        .collect()
}

/// Moves `min(h * gamma_s, x_s)` from each station to its next hop (or out)
/// and adds `h * a_s` at ingress stations.
fn transfer(
    jn: &JacksonNetwork,
    next: &[Option<usize>],
    x: &[f64],
    gamma: &[f64],
    h: f64,
) -> Vec<f64> {
    let mut out = x.to_vec();
    for s in 0..x.len() {
        let moved = (h * gamma[s]).min(x[s]);
        out[s] -= moved;
        if let Some(n) = next[s] {
            out[n] += moved;
        }
        out[s] += h * jn.a[s];
    }
    out
}

/// Heun steps of fixed length `dt`. Both stages use capped transfers, so
/// mass is conserved and `x` stays nonnegative where a station empties.
pub fn integrate_jackson(
    jn: &JacksonNetwork,
    x0: &[f64],
    set: &ScheduleSet,
    opts: &FluidOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    opts.validate()?;
    if x0.len() != jn.len() {
        return Err(Error::InvalidArgument(format!(
            "initial state has {} entries, network has {} stations",
            x0.len(),
            jn.len()
        )));
    }
    let wrap = |t: f64| {
        move |e: Error| Error::FluidSolver {
            t,
            source: Box::new(e),
        }
    };
    let next: Vec<Option<usize>> = (0..jn.len()).map(|s| jn.next(s)).collect();
    let mut ts = vec![0.0];
    let mut xs = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    let mut t = 0.0;
    let mut warm = StationWarm::default();
    while t < opts.t_end {
        let h = opts.dt.min(opts.t_end - t);
        let (g1, w1) = solve_stations(jn, &x, set, &opts.solver, Some(&warm)).map_err(wrap(t))?;
        let mid = transfer(jn, &next, &x, &g1, h);
        let (g2, _) =
            solve_stations(jn, &mid, set, &opts.solver, Some(&w1)).map_err(wrap(t + h))?;
        warm = w1;
        let avg: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| 0.5 * (a + b)).collect();
        x = transfer(jn, &next, &x, &avg, h);
        t = if opts.t_end - t - h <= 1e-12 * opts.t_end.max(1.0) {
            opts.t_end
        } else {
            t + h
        };
        ts.push(t);
        xs.push(x.clone());
    }
    Ok((ts, xs))
}

/// Both sides of the per-link sharing identity and its maximizer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Report {
    /// `q log sigma + sum_r x_r log(x_r / q)`.
    pub lhs: f64,
    /// `sum_r x_r log gamma_r` at `gamma = x sigma / q`.
    pub rhs: f64,
    pub gamma: Vec<f64>,
}

pub fn lemma1_check(x: &[f64], sigma: f64) -> Result<Lemma1Report> {
    if x.is_empty() || x.iter().any(|&v| !(v > 0.0)) || !(sigma > 0.0) {
        return Err(Error::InvalidArgument(
            "class sizes and capacity must be positive".into(),
        ));
    }
    let q: f64 = x.iter().sum();
    let lhs = q * sigma.ln() + x.iter().map(|&v| v * (v / q).ln()).sum::<f64>();
    let gamma: Vec<f64> = x.iter().map(|&v| v * sigma / q).collect();
    let rhs = x.iter().zip(&gamma).map(|(&v, &g)| v * g.ln()).sum();
    Ok(Lemma1Report { lhs, rhs, gamma })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub dt: f64,
    pub t_end: f64,
    /// `max_t |x_pf(t) - x_jackson(t)|_inf` on the shared grid.
    pub trajectory_sup_diff: f64,
    /// Largest gap between the two right-hand sides at the sampled states.
    pub rhs_sup_diff: f64,
}

/// Integrates the multihop proportionally fair fluid (Euler, fixed step)
/// and the station-level fluid on the expanded network (Heun) on the same
/// grid and compares them.
pub fn reduction_equivalence(
    net: &Network,
    set: &ScheduleSet,
    x0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<ReductionReport> {
    let mut opts = FluidOptions::new(dt, t_end).fixed_step();
    opts.solver = SolverOptions::with_tol(REDUCTION_TOL);
    let jn = kelly_to_jackson(net)?;
    let pf = integrate_multihop(net, x0, set, &opts)?;
    let (ts, xs) = integrate_jackson(&jn, x0, set, &opts)?;
    if ts.len() != pf.len() {
        return Err(Error::InvalidArgument(format!(
            "grids differ: {} vs {} samples",
            pf.len(),
            ts.len()
        )));
    }
    let mut trajectory_sup_diff: f64 = 0.0;
    let mut rhs_sup_diff: f64 = 0.0;
    let mut warm = StationWarm::default();
    for (i, x) in xs.iter().enumerate() {
        let d = pf.x[i]
            .iter()
            .zip(x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        trajectory_sup_diff = trajectory_sup_diff.max(d);
        let f = pf_rhs_with_sigma(net, &pf.x[i], &pf.sigma[i]);
        let (gamma, w) = solve_stations(&jn, &pf.x[i], set, &opts.solver, Some(&warm))?;
        warm = w;
        let g = jackson_rhs_with_gamma(&jn, &gamma);
        let e = f
            .iter()
            .zip(&g)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        rhs_sup_diff = rhs_sup_diff.max(e);
    }
    Ok(ReductionReport {
        dt,
        t_end,
        trajectory_sup_diff,
        rhs_sup_diff,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionStudy {
    pub coarse: ReductionReport,
    pub fine: ReductionReport,
    /// `log2(coarse / fine)` of the trajectory differences.
    pub order: f64,
}

impl ReductionStudy {
    pub fn within(&self, factor: f64) -> bool {
        self.coarse.trajectory_sup_diff <= factor * self.coarse.dt
            && self.fine.trajectory_sup_diff <= factor * self.fine.dt
    }
}

/// [`reduction_equivalence`] at `dt` and `dt / 2`.
pub fn reduction_study(
    net: &Network,
    set: &ScheduleSet,
    x0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<ReductionStudy> {
    let coarse = reduction_equivalence(net, set, x0, t_end, dt)?;
    let fine = reduction_equivalence(net, set, x0, t_end, dt / 2.0)?;
    let order = (coarse.trajectory_sup_diff / fine.trajectory_sup_diff).log2();
    Ok(ReductionStudy {
        coarse,
        fine,
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RawLink, RawRoute};

    fn tandem(rate: f64) -> (Network, ScheduleSet) {
        let link = |id: &str, t: &str, h: &str| RawLink {
            id: id.into(),
            tail: t.into(),
            head: h.into(),
        };
        let net = Network::new(
            vec!["a".into(), "b".into(), "c".into()],
            &[link("ab", "a", "b"), link("bc", "b", "c")],
            &[RawRoute {
                id: "r".into(),
                links: vec!["ab".into(), "bc".into()],
                rate,
            }],
        )
        .unwrap();
        let set = ScheduleSet::from_atoms(2, vec![vec![0, 0], vec![1, 0], vec![0, 1]]).unwrap();
        (net, set)
    }

    #[test]
    fn tandem_effective_load() {
        let (net, _) = tandem(0.3);
        let jn = kelly_to_jackson(&net).unwrap();
        assert_eq!(jn.a, vec![0.3, 0.0]);
        assert!((jn.a_bar[0] - 0.3).abs() < 1e-15 && (jn.a_bar[1] - 0.3).abs() < 1e-15);
        let last = jn.next(0).unwrap();
        assert_eq!((0..2).map(|t| jn.p[(last, t)]).sum::<f64>(), 0.0);
    }

    #[test]
    fn lemma1_hand_values() {
        let r = lemma1_check(&[2.0, 1.0], 3.0).unwrap();
        assert!((r.lhs - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert!((r.rhs - r.lhs).abs() < 1e-12);
        assert!((r.gamma[0] - 2.0).abs() < 1e-12 && (r.gamma[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn station_rates_split_link_rate_proportionally() {
        let (net, set) = tandem(0.2);
        let jn = kelly_to_jackson(&net).unwrap();
        let g = station_program(&jn, &[2.0, 1.0], &set, &SolverOptions::fluid()).unwrap();
        assert!((g[0] - 2.0 / 3.0).abs() < 1e-6 && (g[1] - 1.0 / 3.0).abs() < 1e-6);
    }
}
