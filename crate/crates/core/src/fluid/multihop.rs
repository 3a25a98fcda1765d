use super::{share_floor, FluidOptions};
use crate::error::{Error, Result};
use crate::model::{load_headroom, Network, ScheduleSet};
use crate::program::{solve_weighted, MeanSchedule, SolverOptions, Utility};

/// Sampled multihop fluid path over stations `(j, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiHopTrajectory {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
    /// Mass leaving the network during the step that starts at each sample,
    /// divided by the step length. Zero at the last sample.
    pub outflow: Vec<f64>,
    pub hit_time: Option<f64>,
}

impl MultiHopTrajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.x[i].iter().sum()
    }
}

/// Default class shares at each link: proportional to route rates, uniform
/// if the link carries no load.
pub(crate) fn default_shares(net: &Network) -> Vec<f64> {
    let rates = net.route_rates();
    let mut share = vec![0.0; net.stations().len()];
    for j in 0..net.num_links() {
        let st = net.link_stations(j);
        let total: f64 = st.iter().map(|&s| rates[net.stations()[s].route]).sum();
        for &s in st {
            share[s] = if total > 0.0 {
                rates[net.stations()[s].route] / total
            } else {
                1.0 / st.len() as f64
            };
        }
    }
    share
}

/// Link-level proportionally fair schedule for link totals `q`, with links
/// below the share floor dropped.
pub(crate) fn pf_sigma(
    q: &[f64],
    set: &ScheduleSet,
    opts: &SolverOptions,
    warm: Option<&MeanSchedule>,
) -> Result<MeanSchedule> {
    let floor = share_floor(q);
    let w: Vec<f64> = q
        .iter()
        .map(|&v| if v > 0.0 && v >= floor { v } else { 0.0 })
        .collect();
    solve_weighted(Utility::Log, &w, set, opts, warm)
}

/// Per-station departure rates `share_s * sigma*_j` and the updated shares.
fn station_rates(
    net: &Network,
    x: &[f64],
    q: &[f64],
    sigma: &[f64],
    shares: &mut [f64],
) -> Vec<f64> {
    let floor = share_floor(q);
    let mut out = vec![0.0; x.len()];
    for (s, st) in net.stations().iter().enumerate() {
        let j = st.link;
        if q[j] > 0.0 && q[j] >= floor {
            shares[s] = x[s] / q[j];
        }
        out[s] = shares[s] * sigma[j];
    }
    out
}

/// Right-hand side of the proportionally fair multihop fluid at `x`.
pub fn pf_rhs(
    net: &Network,
    x: &[f64],
    set: &ScheduleSet,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let q = net.link_totals(x);
    let ms = pf_sigma(&q, set, opts, None)?;
    Ok(pf_rhs_with_sigma(net, x, &ms.s))
}

/// Right-hand side at `x` given the link service rates there.
pub(crate) fn pf_rhs_with_sigma(net: &Network, x: &[f64], sigma: &[f64]) -> Vec<f64> {
    let q = net.link_totals(x);
    let mut shares = default_shares(net);
    let out = station_rates(net, x, &q, sigma, &mut shares);
    let rates = net.route_rates();
    (0..x.len())
        .map(|s| {
            let inflow = match net.prev_station(s) {
                Some(p) => out[p],
                None => rates[net.stations()[s].route],
            };
            inflow - out[s]
        })
        .collect()
}

/// Integrates the proportionally fair multihop fluid.
///
/// Each step moves `min(h * share_s * sigma*_j, x_s)` from station `s` to
/// its successor (or out of the network), and adds `h * a_r` at each
/// ingress. Mass is conserved exactly and `x` stays nonnegative. Shares at
/// links whose total is below the share floor are frozen at their last value.
pub fn integrate_multihop(
    net: &Network,
    x0: &[f64],
    set: &ScheduleSet,
    opts: &FluidOptions,
) -> Result<MultiHopTrajectory> {
    let ns = net.stations().len();
    if x0.len() != ns {
        return Err(Error::InvalidArgument(format!(
            "initial state has {} entries, network has {ns} stations",
            x0.len()
        )));
    }
    if x0.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidArgument(
            "initial state must be finite and nonnegative".into(),
        ));
    }
    opts.validate()?;
    let rates = net.route_rates();
    let interior = load_headroom(net.link_loads(), set)?.is_interior();

    let mut traj = MultiHopTrajectory {
        t: Vec::new(),
        x: Vec::new(),
        q: Vec::new(),
        sigma: Vec::new(),
        outflow: Vec::new(),
        hit_time: None,
    };
    let mut shares = default_shares(net);
    let mut x = x0.to_vec();
    let mut t = 0.0;
    let mut absorbed = false;
    let mut warm: Option<MeanSchedule> = None;
    loop {
        let mass: f64 = x.iter().sum();
        if traj.hit_time.is_none() && mass <= opts.hit_tol {
            traj.hit_time = Some(t);
        }
        if interior && mass <= opts.zero_snap {
            absorbed = true;
            x.iter_mut().for_each(|v| *v = 0.0);
        }
        let q = net.link_totals(&x);
        let sigma = if absorbed {
            net.link_loads().to_vec()
        } else {
            let ms =
                pf_sigma(&q, set, &opts.solver, warm.as_ref()).map_err(|e| Error::FluidSolver {
                    t,
                    source: Box::new(e),
                })?;
            let s = ms.s.clone();
            if ms.scale > 0.0 {
                warm = Some(ms);
            }
            s
        };
        traj.t.push(t);
        traj.x.push(x.clone());
        traj.q.push(q.clone());
        traj.sigma.push(sigma.clone());
        if t >= opts.t_end {
            traj.outflow.push(0.0);
            break;
        }
        let mut h = opts.dt.min(opts.t_end - t);
        if !absorbed && opts.kappa.is_finite() {
            h = h.min(opts.kappa * mass);
        }
        let mut departed = 0.0;
        if !absorbed {
            let rate = station_rates(net, &x, &q, &sigma, &mut shares);
            let moved: Vec<f64> = (0..ns).map(|s| (h * rate[s]).min(x[s])).collect();
            let mut next = x.clone();
            for s in 0..ns {
                next[s] -= moved[s];
                match net.next_station(s) {
                    Some(n) => next[n] += moved[s],
                    None => departed += moved[s],
                }
                if net.prev_station(s).is_none() {
                    next[s] += h * rates[net.stations()[s].route];
                }
            }
            x = next;
        }
        traj.outflow.push(if absorbed {
            net.route_rates().iter().sum()
        } else {
            departed / h
        });
        t = if opts.t_end - t - h <= 1e-12 * opts.t_end.max(1.0) {
            opts.t_end
        } else {
            t + h
        };
    }
    Ok(traj)
}
