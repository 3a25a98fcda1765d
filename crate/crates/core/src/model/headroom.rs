use minilp::{ComparisonOp, OptimizationDirection, Problem};

use super::schedule::ScheduleSet;
use crate::error::{Error, Result};

/// Feasibility tolerance for hull certificates.
pub const HULL_TOL: f64 = 1e-9;

/// Largest scaling of a load vector that still fits in the schedule hull.
#[derive(Debug, Clone, PartialEq)]
pub struct Headroom {
    /// `theta* - 1`: the largest `eps` with `(1 + eps) * a_bar` in the hull.
    pub epsilon: f64,
    /// `theta*`: the largest scaling factor.
    pub theta: f64,
    /// Convex weights over `ScheduleSet::atoms()` certifying `theta * a_bar`.
    pub weights: Vec<f64>,
}

impl Headroom {
    /// True when the load is strictly inside the hull.
    pub fn is_interior(&self) -> bool {
        self.epsilon > 0.0
    }

    pub fn outside_hull(&self) -> bool {
        self.epsilon < 0.0
    }

    /// `sum_k w_k sigma_k`.
    pub fn certificate_point(&self, set: &ScheduleSet) -> Vec<f64> {
        let mut p = vec![0.0; set.dim()];
        for (w, atom) in self.weights.iter().zip(set.atoms()) {
            for (pj, &a) in p.iter_mut().zip(atom) {
                *pj += w * f64::from(a);
            }
        }
        p
    }
}

/// Solves `max theta` subject to `sum_k w_k sigma_k >= theta * a_bar`, `w` a
/// probability vector. A zero load has unbounded headroom (`epsilon = inf`).
pub fn load_headroom(a_bar: &[f64], set: &ScheduleSet) -> Result<Headroom> {
    if a_bar.len() != set.dim() {
        return Err(Error::InvalidArgument(format!(
            "load vector has {} components, schedule set has {}",
            a_bar.len(),
            set.dim()
        )));
    }
    if let Some(j) = a_bar.iter().position(|a| !a.is_finite() || *a < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "load on link #{j} is negative or non-finite"
        )));
    }
    for (j, &a) in a_bar.iter().enumerate() {
        if a > 0.0 && set.atoms().iter().all(|s| s[j] == 0) {
            return Err(Error::NeverServed { link: j });
        }
    }
    if a_bar.iter().all(|&a| a == 0.0) {
        let mut weights = vec![0.0; set.len()];
        weights[set.zero_index()] = 1.0;
        return Ok(Headroom {
            epsilon: f64::INFINITY,
            theta: f64::INFINITY,
            weights,
        });
    }

    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let theta = lp.add_var(1.0, (0.0, f64::INFINITY));
    let w: Vec<_> = set
        .atoms()
        .iter()
        .map(|_| lp.add_var(0.0, (0.0, 1.0)))
        .collect();
    let simplex: Vec<_> = w.iter().map(|&v| (v, 1.0)).collect();
    lp.add_constraint(simplex.as_slice(), ComparisonOp::Eq, 1.0);
    for (j, &a) in a_bar.iter().enumerate() {
        let mut row: Vec<_> = w
            .iter()
            .zip(set.atoms())
            .filter(|(_, atom)| atom[j] > 0)
            .map(|(&v, atom)| (v, f64::from(atom[j])))
            .collect();
        row.push((theta, -a));
        lp.add_constraint(row.as_slice(), ComparisonOp::Ge, 0.0);
    }
    let sol = lp.solve().map_err(|e| Error::Lp(e.to_string()))?;
    let theta_star = sol[theta];
    let mut weights: Vec<f64> = w.iter().map(|&v| sol[v].max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    for x in &mut weights {
        *x /= total;
    }
    Ok(Headroom {
        epsilon: theta_star - 1.0,
        theta: theta_star,
        weights,
    })
}

/// Scales `direction` onto the hull boundary: returns `theta*` such that
/// `theta* * direction` is on the boundary.
pub fn boundary_scale(direction: &[f64], set: &ScheduleSet) -> Result<f64> {
    Ok(load_headroom(direction, set)?.theta)
}
