//! Concave scheduling programs over the hull of a schedule set.

mod decompose;
pub(crate) mod frank_wolfe;
mod objective;
mod oracle;

pub use decompose::{
    caratheodory_decompose, sample_schedule, Decomposition, HULL_RECON_TOL, WEIGHT_SUM_TOL,
};
pub use objective::{weighted_value, Objective, Utility};
pub use oracle::{capped_linear_oracle, linear_oracle};

use frank_wolfe::{pairwise_fw, Active, VertexOracle};

use crate::error::{Error, Result};
use crate::model::ScheduleSet;

/// Gap tolerance used by the slot-level policies.
pub const POLICY_TOL: f64 = 1e-8;
/// Gap tolerance used when the fluid right-hand side is evaluated.
pub const FLUID_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: POLICY_TOL,
            max_iters: 100_000,
        }
    }
}

impl SolverOptions {
    pub fn fluid() -> Self {
        SolverOptions {
            tol: FLUID_TOL,
            ..Self::default()
        }
    }

    pub fn with_tol(tol: f64) -> Self {
        SolverOptions {
            tol,
            ..Self::default()
        }
    }
}

/// Solver output: a hull point together with the atoms it was built from.
///
/// The objective is normalized so that the coordinate weights sum to one;
/// `gap` bounds the suboptimality on that scale. Multiply by `scale` (the
/// unnormalized weight sum) for the gap of the original objective.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanSchedule {
    pub s: Vec<f64>,
    pub gap: f64,
    pub scale: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Convex weights over atoms of the set the program was solved on.
    pub support: Vec<(f64, Vec<u32>)>,
}

impl MeanSchedule {
    pub fn raw_gap(&self) -> f64 {
        self.gap * self.scale
    }

    fn vertex(atom: &[u32]) -> Self {
        MeanSchedule {
            s: atom.iter().map(|&x| f64::from(x)).collect(),
            gap: 0.0,
            scale: 0.0,
            iterations: 0,
            converged: true,
            support: vec![(1.0, atom.to_vec())],
        }
    }
}

struct AtomOracle<'a> {
    set: &'a ScheduleSet,
}

impl VertexOracle for AtomOracle<'_> {
    type Key = usize;

    fn best(&self, grad: &[f64]) -> (usize, Vec<f64>) {
        let k = linear_oracle(grad, self.set);
        (k, to_point(&self.set.atoms()[k]))
    }
}

fn to_point(atom: &[u32]) -> Vec<f64> {
    atom.iter().map(|&x| f64::from(x)).collect()
}

/// Maximizes `sum_j g(s_j) q_j^alpha` over `<set>`.
pub fn solve_program(
    obj: &Objective,
    q: &[f64],
    set: &ScheduleSet,
    opts: &SolverOptions,
) -> Result<MeanSchedule> {
    solve_weighted(obj.utility, &obj.queue_weights(q), set, opts, None)
}

/// As [`solve_program`], starting from a previous solution. Atoms of the
/// previous support that are no longer in `set` are discarded.
pub fn solve_program_warm(
    obj: &Objective,
    q: &[f64],
    set: &ScheduleSet,
    opts: &SolverOptions,
    warm: &MeanSchedule,
) -> Result<MeanSchedule> {
    solve_weighted(obj.utility, &obj.queue_weights(q), set, opts, Some(warm))
}

/// Maximizes `sum_j w_j g(s_j)` over `<set>` for explicit weights `w >= 0`.
pub fn solve_weighted(
    utility: Utility,
    weights: &[f64],
    set: &ScheduleSet,
    opts: &SolverOptions,
    warm: Option<&MeanSchedule>,
) -> Result<MeanSchedule> {
    if weights.len() != set.dim() {
        return Err(Error::InvalidArgument(format!(
            "{} weights for a {}-link schedule set",
            weights.len(),
            set.dim()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidObjective(
            "weights must be finite and nonnegative".into(),
        ));
    }
    utility.validate()?;
    let scale: f64 = weights.iter().sum();
    if scale == 0.0 {
        return Ok(MeanSchedule::vertex(&set.atoms()[set.zero_index()]));
    }
    let c: Vec<f64> = weights.iter().map(|w| w / scale).collect();

    if utility.is_linear() {
        let mut ms = MeanSchedule::vertex(&set.atoms()[linear_oracle(&c, set)]);
        ms.scale = scale;
        return Ok(ms);
    }

    let start = initial_active(&c, set, warm)?;
    let r = pairwise_fw(
        &AtomOracle { set },
        utility,
        &c,
        start,
        opts.tol,
        opts.max_iters,
    );
    if !r.converged {
        log::debug!(
            "solver stopped after {} iterations with gap {:.3e}",
            r.iterations,
            r.gap
        );
    }
    Ok(MeanSchedule {
        s: r.s,
        gap: r.gap,
        scale,
        iterations: r.iterations,
        converged: r.converged,
        support: r
            .active
            .into_iter()
            .map(|a| (a.weight, set.atoms()[a.key].clone()))
            .collect(),
    })
}

fn initial_active(
    c: &[f64],
    set: &ScheduleSet,
    warm: Option<&MeanSchedule>,
) -> Result<Vec<Active<usize>>> {
    let mut active: Vec<Active<usize>> = Vec::new();
    if let Some(w) = warm {
        for (weight, atom) in &w.support {
            if *weight > 0.0 {
                if let Some(k) = set.index_of(atom) {
                    active.push(Active {
                        key: k,
                        point: to_point(atom),
                        weight: *weight,
                    });
                }
            }
        }
    }
    if active.is_empty() {
        let zero = set.zero_index();
        let n = set.len() - 1;
        if n == 0 {
            let link = c.iter().position(|&x| x > 0.0).unwrap_or(0);
            return Err(Error::NoPositiveStart { link });
        }
        active = set
            .atoms()
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != zero)
            .map(|(k, a)| Active {
                key: k,
                point: to_point(a),
                weight: 1.0 / n as f64,
            })
            .collect();
    }
    let total: f64 = active.iter().map(|a| a.weight).sum();
    active.iter_mut().for_each(|a| a.weight /= total);

    // Every positive-weight coordinate must start strictly positive.
    for j in 0..c.len() {
        if c[j] <= 0.0 {
            continue;
        }
        let covered = active.iter().any(|a| a.weight > 0.0 && a.point[j] > 0.0);
        if covered {
            continue;
        }
        let (k, best) =
            set.atoms().iter().enumerate().fold(
                (0, 0),
                |acc, (k, a)| if a[j] > acc.1 { (k, a[j]) } else { acc },
            );
        if best == 0 {
            return Err(Error::NoPositiveStart { link: j });
        }
        active.iter_mut().for_each(|a| a.weight *= 0.99);
        match active.iter().position(|a| a.key == k) {
            Some(i) => active[i].weight += 0.01,
            None => active.push(Active {
                key: k,
                point: to_point(&set.atoms()[k]),
                weight: 0.01,
            }),
        }
    }
    Ok(active)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simplex() -> ScheduleSet {
        ScheduleSet::from_atoms(2, vec![vec![0, 0], vec![1, 0], vec![0, 1]]).unwrap()
    }

    #[test]
    fn proportional_fair_on_simplex() {
        let ms = solve_program(
            &Objective::proportional(),
            &[2.0, 1.0],
            &simplex(),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(ms.converged);
        assert!((ms.s[0] - 2.0 / 3.0).abs() < 1e-6);
        assert!((ms.s[1] - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn grid_search_agrees() {
        // s = (u, v) with u + v <= 1; log objective, q = (2, 1)
        let mut best = f64::NEG_INFINITY;
        let n = 10_000;
        for i in 1..n {
            let u = i as f64 / n as f64;
            let v = 1.0 - u;
            best = best.max(2.0 * u.ln() + v.ln());
        }
        let ms = solve_program(
            &Objective::proportional(),
            &[2.0, 1.0],
            &simplex(),
            &SolverOptions::default(),
        )
        .unwrap();
        let val = 2.0 * ms.s[0].ln() + ms.s[1].ln();
        assert!(val >= best - 1e-9);
    }

    #[test]
    fn zero_weight_coordinate_dropped() {
        let ms = solve_program(
            &Objective::proportional(),
            &[5.0, 0.0],
            &simplex(),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!((ms.s[0] - 1.0).abs() < 1e-6);
        assert!(ms.s[1].abs() < 1e-6);
    }

    #[test]
    fn all_zero_weights_give_zero_schedule() {
        let ms = solve_program(
            &Objective::proportional(),
            &[0.0, 0.0],
            &simplex(),
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(ms.s, vec![0.0, 0.0]);
        assert_eq!(ms.gap, 0.0);
    }

    #[test]
    fn zero_only_set_has_no_start() {
        let set = ScheduleSet::from_atoms_unchecked(1, vec![vec![0]]);
        assert!(matches!(
            solve_program(
                &Objective::proportional(),
                &[1.0],
                &set,
                &SolverOptions::default()
            ),
            Err(Error::NoPositiveStart { link: 0 })
        ));
    }

    #[test]
    fn warm_start_reaches_same_point() {
        let set = ScheduleSet::from_atoms(
            3,
            vec![
                vec![0, 0, 0],
                vec![1, 1, 0],
                vec![0, 1, 1],
                vec![1, 0, 0],
                vec![0, 0, 2],
            ],
        )
        .unwrap();
        let obj = Objective::new(1.5, Utility::Power { beta: 2.0 }).unwrap();
        let opts = SolverOptions::with_tol(1e-12);
        let first = solve_program(&obj, &[3.0, 1.0, 2.0], &set, &opts).unwrap();
        let cold = solve_program(&obj, &[3.1, 1.0, 1.9], &set, &opts).unwrap();
        let warm = solve_program_warm(&obj, &[3.1, 1.0, 1.9], &set, &opts, &first).unwrap();
        for (a, b) in cold.s.iter().zip(&warm.s) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn round_trip_decomposition() {
        let set = ScheduleSet::from_atoms(
            3,
            vec![
                vec![0, 0, 0],
                vec![1, 1, 0],
                vec![0, 1, 1],
                vec![1, 0, 1],
                vec![2, 0, 0],
                vec![0, 0, 1],
            ],
        )
        .unwrap();
        let ms = solve_program(
            &Objective::proportional(),
            &[1.0, 4.0, 2.0],
            &set,
            &SolverOptions::default(),
        )
        .unwrap();
        let d = caratheodory_decompose(&ms, &set).unwrap();
        assert!(d.len() <= 4);
        for (a, b) in d.mean().iter().zip(&ms.s) {
            assert!((a - b).abs() <= 1e-9);
        }
    }
}
