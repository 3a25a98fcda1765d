//! Pairwise Frank-Wolfe over the convex hull of a finite vertex set.
//!
//! The engine is generic over the vertex oracle so that the same code solves
//! the link-level program over `<S>` and the station-level program used by the
//! expanded (link, route) fluid.

use nalgebra::{DMatrix, DVector};

use super::objective::Utility;

pub(crate) trait VertexOracle {
    type Key: Clone + PartialEq;

    /// A vertex maximizing `grad · v`.
    fn best(&self, grad: &[f64]) -> (Self::Key, Vec<f64>);
}

#[derive(Debug, Clone)]
pub(crate) struct Active<K> {
    pub key: K,
    pub point: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct FwResult<K> {
    pub s: Vec<f64>,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub active: Vec<Active<K>>,
}

const DROP_WEIGHT: f64 = 1e-15;

fn mean_of<K>(active: &[Active<K>], dim: usize) -> Vec<f64> {
    let mut s = vec![0.0; dim];
    for a in active {
        for (sj, &p) in s.iter_mut().zip(&a.point) {
            *sj += a.weight * p;
        }
    }
    s
}

fn gradient(utility: Utility, c: &[f64], s: &[f64]) -> Vec<f64> {
    c.iter()
        .zip(s)
        .map(|(&cj, &sj)| {
            if cj > 0.0 {
                cj * utility.deriv(sj)
            } else {
                0.0
            }
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximizes `t -> sum_j c_j g(s_j + t d_j)` on `[0, tmax]`.
///
/// The restriction is concave, so its derivative is decreasing; Newton steps
/// are accepted only while they stay inside the current bracket.
fn line_search(utility: Utility, c: &[f64], s: &[f64], d: &[f64], tmax: f64) -> f64 {
    let dphi = |t: f64| -> f64 {
        let mut acc = 0.0;
        for j in 0..c.len() {
            if c[j] <= 0.0 || d[j] == 0.0 {
                continue;
            }
            let x = s[j] + t * d[j];
            if x <= 0.0 {
                return if d[j] < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                };
            }
            acc += c[j] * utility.deriv(x) * d[j];
        }
        acc
    };
    let d2phi = |t: f64| -> f64 {
        (0..c.len())
            .filter(|&j| c[j] > 0.0 && d[j] != 0.0)
            .map(|j| c[j] * utility.second(s[j] + t * d[j]) * d[j] * d[j])
            .sum()
    };

    if dphi(0.0) <= 0.0 {
        return 0.0;
    }
    if dphi(tmax) >= 0.0 {
        return tmax;
    }
    let (mut lo, mut hi) = (0.0_f64, tmax);
    let mut t = 0.0;
    for _ in 0..200 {
        let g = dphi(t);
        if g > 0.0 {
            lo = t;
        } else if g < 0.0 {
            hi = t;
        } else {
            return t;
        }
        if hi - lo <= 1e-16 * tmax.max(1e-300) {
            break;
        }
        let h = d2phi(t);
        let mut next = t - g / h;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if next == t {
            break;
        }
        t = next;
    }
    lo
}

/// Iterations between Newton corrections on the active face.
const CORRECT_EVERY: usize = 32;

/// Damped Newton steps on the weights of the current active set.
///
/// Pairwise steps crawl when a few coordinates are tiny (the objective is
/// badly conditioned there); a Newton step on the face fixes that. Weights
/// that reach zero are dropped.
fn correct_face<K>(
    utility: Utility,
    c: &[f64],
    active: &mut Vec<Active<K>>,
    s: &mut Vec<f64>,
    steps: usize,
) {
    let dim = c.len();
    for _ in 0..steps {
        let m = active.len();
        if m < 2 {
            return;
        }
        let grad = gradient(utility, c, s);
        let gw: Vec<f64> = active.iter().map(|a| dot(&grad, &a.point)).collect();
        let mut h = DMatrix::<f64>::zeros(m, m);
        for j in 0..dim {
            if c[j] <= 0.0 {
                continue;
            }
            let dj = -c[j] * utility.second(s[j]);
            if dj == 0.0 {
                continue;
            }
            for a in 0..m {
                let pa = active[a].point[j];
                if pa == 0.0 {
                    continue;
                }
                for b in a..m {
                    let v = dj * pa * active[b].point[j];
                    h[(a, b)] += v;
                    if a != b {
                        h[(b, a)] += v;
                    }
                }
            }
        }
        let scale = (0..m).map(|a| h[(a, a)]).fold(0.0, f64::max).max(1e-300);
        let mut k = DMatrix::<f64>::zeros(m + 1, m + 1);
        k.view_mut((0, 0), (m, m)).copy_from(&h);
        for a in 0..m {
            k[(a, a)] += 1e-10 * scale;
            k[(a, m)] = 1.0;
            k[(m, a)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(m + 1);
        for a in 0..m {
            rhs[a] = gw[a];
        }
        let Some(sol) = k.lu().solve(&rhs) else {
            return;
        };
        let dw: Vec<f64> = (0..m).map(|a| sol[a]).collect();
        let ascent: f64 = dw.iter().zip(&gw).map(|(d, g)| d * g).sum();
        if !(ascent > 0.0) || !ascent.is_finite() {
            return;
        }
        let mut tmax: f64 = 1.0;
        for (a, &d) in dw.iter().enumerate() {
            if d < 0.0 {
                tmax = tmax.min(active[a].weight / -d);
            }
        }
        let mut d = vec![0.0; dim];
        for (a, &da) in dw.iter().enumerate() {
            for (dj, &p) in d.iter_mut().zip(&active[a].point) {
                *dj += da * p;
            }
        }
        let t = line_search(utility, c, s, &d, tmax);
        if t <= 0.0 {
            return;
        }
        for (a, &da) in dw.iter().enumerate() {
            active[a].weight += t * da;
        }
        active.retain(|a| a.weight > DROP_WEIGHT);
        let total: f64 = active.iter().map(|a| a.weight).sum();
        active.iter_mut().for_each(|a| a.weight /= total);
        *s = mean_of(active, dim);
        if t == 1.0 && ascent < 1e-16 {
            return;
        }
    }
}

/// Runs pairwise Frank-Wolfe from the given active set.
///
/// `c` holds nonnegative coordinate weights; coordinates with `c_j = 0` do
/// not enter the objective. The start must keep every positive-weight
/// coordinate strictly positive.
pub(crate) fn pairwise_fw<O: VertexOracle>(
    oracle: &O,
    utility: Utility,
    c: &[f64],
    mut active: Vec<Active<O::Key>>,
    tol: f64,
    max_iters: usize,
) -> FwResult<O::Key> {
    let dim = c.len();
    let mut s = mean_of(&active, dim);
    let mut gap = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iters {
        let grad = gradient(utility, c, &s);
        let (vkey, vpoint) = oracle.best(&grad);
        gap = dot(&grad, &vpoint) - dot(&grad, &s);
        if gap <= tol {
            converged = true;
            break;
        }
        iterations += 1;

        // Away vertex: the active vertex worst for the current gradient.
        let away = active
            .iter()
            .enumerate()
            .map(|(i, a)| (i, dot(&grad, &a.point)))
            .fold(
                (0, f64::INFINITY),
                |acc, x| if x.1 < acc.1 { x } else { acc },
            )
            .0;
        let d: Vec<f64> = vpoint
            .iter()
            .zip(&active[away].point)
            .map(|(v, a)| v - a)
            .collect();
        let tmax = active[away].weight;
        let t = line_search(utility, c, &s, &d, tmax);

        if t > 0.0 {
            active[away].weight -= t;
            match active.iter().position(|a| a.key == vkey) {
                Some(i) => active[i].weight += t,
                None => active.push(Active {
                    key: vkey,
                    point: vpoint,
                    weight: t,
                }),
            }
            let dropped = active[away].weight <= DROP_WEIGHT;
            if dropped {
                active.swap_remove(away);
                let total: f64 = active.iter().map(|a| a.weight).sum();
                active.iter_mut().for_each(|a| a.weight /= total);
                s = mean_of(&active, dim);
            } else {
                s.iter_mut().zip(&d).for_each(|(sj, dj)| *sj += t * dj);
            }
        } else {
            // Pairwise direction stalled numerically; fall back to a plain
            // Frank-Wolfe step toward the oracle vertex.
            let d: Vec<f64> = vpoint.iter().zip(&s).map(|(v, x)| v - x).collect();
            let t = line_search(utility, c, &s, &d, 1.0);
            if t <= 0.0 {
                break;
            }
            active.iter_mut().for_each(|a| a.weight *= 1.0 - t);
            match active.iter().position(|a| a.key == vkey) {
                Some(i) => active[i].weight += t,
                None => active.push(Active {
                    key: vkey,
                    point: vpoint,
                    weight: t,
                }),
            }
            active.retain(|a| a.weight > DROP_WEIGHT);
            s = mean_of(&active, dim);
        }
        if iterations % CORRECT_EVERY == 0 {
            correct_face(utility, c, &mut active, &mut s, 8);
            s = mean_of(&active, dim);
        }
    }

    let total: f64 = active.iter().map(|a| a.weight).sum();
    active.iter_mut().for_each(|a| a.weight /= total);
    let s = mean_of(&active, dim);
    if !converged {
        let grad = gradient(utility, c, &s);
        let (_, vpoint) = oracle.best(&grad);
        gap = dot(&grad, &vpoint) - dot(&grad, &s);
        converged = gap <= tol;
    }
    FwResult {
        s,
        gap: gap.max(0.0),
        iterations,
        converged,
        active,
    }
}
