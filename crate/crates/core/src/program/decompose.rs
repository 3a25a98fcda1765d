use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use rand::Rng;

use super::MeanSchedule;
use crate::error::{Error, Result};
use crate::model::ScheduleSet;

/// Tolerance on the weight sum.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Reconstruction error beyond which a point is declared outside the hull.
pub const HULL_RECON_TOL: f64 = 1e-7;

/// A probability distribution over schedule atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    atoms: Vec<(f64, Vec<u32>)>,
}

impl Decomposition {
    pub fn new(atoms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        let Some(dim) = atoms.first().map(|(_, a)| a.len()) else {
            return Err(Error::InvalidDecomposition("no atoms".into()));
        };
        if atoms.iter().any(|(_, a)| a.len() != dim) {
            return Err(Error::InvalidDecomposition(
                "atoms have different lengths".into(),
            ));
        }
        if let Some((w, _)) = atoms
            .iter()
            .find(|(w, _)| !w.is_finite() || *w < 0.0 || *w > 1.0 + WEIGHT_SUM_TOL)
        {
            return Err(Error::InvalidDecomposition(format!(
                "weight {w} outside [0, 1]"
            )));
        }
        let sum: f64 = atoms.iter().map(|(w, _)| w).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidDecomposition(format!("weights sum to {sum}")));
        }
        Ok(Decomposition { atoms })
    }

    pub fn atoms(&self) -> &[(f64, Vec<u32>)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].1.len()
    }

    /// `sum_k w_k sigma_k`.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for (w, a) in &self.atoms {
            for (mj, &x) in m.iter_mut().zip(a) {
                *mj += w * f64::from(x);
            }
        }
        m
    }

    /// Decomposes an arbitrary point of `<S>` by linear programming, then
    /// reduces the support.
    pub fn from_point(s: &[f64], set: &ScheduleSet) -> Result<Self> {
        if s.len() != set.dim() {
            return Err(Error::InvalidArgument(format!(
                "point has {} components, schedule set has {}",
                s.len(),
                set.dim()
            )));
        }
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let w: Vec<_> = set
            .atoms()
            .iter()
            .map(|_| lp.add_var(0.0, (0.0, 1.0)))
            .collect();
        let simplex: Vec<_> = w.iter().map(|&v| (v, 1.0)).collect();
        lp.add_constraint(simplex.as_slice(), ComparisonOp::Eq, 1.0);
        for (j, &sj) in s.iter().enumerate() {
            let up = lp.add_var(1.0, (0.0, f64::INFINITY));
            let down = lp.add_var(1.0, (0.0, f64::INFINITY));
            let mut row: Vec<_> = w
                .iter()
                .zip(set.atoms())
                .filter(|(_, a)| a[j] > 0)
                .map(|(&v, a)| (v, f64::from(a[j])))
                .collect();
            row.push((up, 1.0));
            row.push((down, -1.0));
            lp.add_constraint(row.as_slice(), ComparisonOp::Eq, sj);
        }
        let sol = lp.solve().map_err(|e| Error::Lp(e.to_string()))?;
        if sol.objective() > HULL_RECON_TOL {
            return Err(Error::NotInHull {
                error: sol.objective(),
            });
        }
        let support: Vec<(f64, Vec<u32>)> = w
            .iter()
            .zip(set.atoms())
            .map(|(&v, a)| (sol[v], a.clone()))
            .filter(|(x, _)| *x > 1e-12)
            .collect();
        finish(reduce_support(support), s)
    }
}

fn finish(atoms: Vec<(f64, Vec<u32>)>, target: &[f64]) -> Result<Decomposition> {
    let d = Decomposition::new(atoms)?;
    let err = d
        .mean()
        .iter()
        .zip(target)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if err > HULL_RECON_TOL {
        return Err(Error::NotInHull { error: err });
    }
    Ok(d)
}

/// Reduces the solver's active set to at most `|J| + 1` atoms.
///
/// Every atom must belong to `set`; the reconstruction must match `ms.s`
/// within [`HULL_RECON_TOL`].
pub fn caratheodory_decompose(ms: &MeanSchedule, set: &ScheduleSet) -> Result<Decomposition> {
    if let Some((_, a)) = ms.support.iter().find(|(_, a)| set.index_of(a).is_none()) {
        return Err(Error::InvalidDecomposition(format!(
            "atom {a:?} is not in the schedule set"
        )));
    }
    finish(reduce_support(ms.support.clone()), &ms.s)
}

/// Iterative null-space elimination: while the lifted atoms `(sigma, 1)` are
/// linearly dependent, move along a null vector until one weight hits zero.
pub(crate) fn reduce_support(mut atoms: Vec<(f64, Vec<u32>)>) -> Vec<(f64, Vec<u32>)> {
    atoms.retain(|(w, _)| *w > 0.0);
    let Some(dim) = atoms.first().map(|(_, a)| a.len()) else {
        return atoms;
    };
    loop {
        let m = atoms.len();
        if m <= 1 {
            break;
        }
        let rows = (dim + 1).max(m);
        let mut a = DMatrix::<f64>::zeros(rows, m);
        for (k, (_, atom)) in atoms.iter().enumerate() {
            for (j, &x) in atom.iter().enumerate() {
                a[(j, k)] = f64::from(x);
            }
            a[(dim, k)] = 1.0;
        }
        let svd = a.svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let (imin, smin) =
            svd.singular_values
                .iter()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |acc, (i, &x)| {
                        if x < acc.1 {
                            (i, x)
                        } else {
                            acc
                        }
                    },
                );
        let smax = svd.singular_values.max();
        if smin > 1e-9 * smax {
            break;
        }
        let mut lambda: Vec<f64> = v_t.row(imin).iter().copied().collect();
        let lmax = lambda.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if lambda.iter().all(|&x| x <= 1e-12 * lmax) {
            lambda.iter_mut().for_each(|x| *x = -*x);
        }
        let (kstar, t) = lambda
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 1e-12 * lmax)
            .map(|(k, &l)| (k, atoms[k].0 / l))
            .fold((usize::MAX, f64::INFINITY), |acc, x| {
                if x.1 < acc.1 {
                    x
                } else {
                    acc
                }
            });
        if kstar == usize::MAX {
            break;
        }
        for (k, (w, _)) in atoms.iter_mut().enumerate() {
            *w = if k == kstar {
                0.0
            } else {
                (*w - t * lambda[k]).max(0.0)
            };
        }
        atoms.retain(|(w, _)| *w > 1e-15);
    }
    let total: f64 = atoms.iter().map(|(w, _)| w).sum();
    atoms.iter_mut().for_each(|(w, _)| *w /= total);
    atoms
}

/// Draws an atom with probability equal to its weight.
pub fn sample_schedule<'a, R: Rng + ?Sized>(d: &'a Decomposition, rng: &mut R) -> &'a [u32] {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (w, a) in &d.atoms {
        acc += w;
        if u < acc {
            return a;
        }
    }
    // u landed in the rounding slack above the last partial sum
    &d.atoms
        .iter()
        .rev()
        .find(|(w, _)| *w > 0.0)
        .unwrap_or(&d.atoms[0])
        .1
}
