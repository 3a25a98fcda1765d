use crate::model::ScheduleSet;

/// Index of an atom maximizing `w · sigma`.
///
/// Ties go to the lexicographically smallest atom; since atoms are stored in
/// lexicographic order that is the first maximizer found. The zero atom is
/// always present, so negative weights select it.
pub fn linear_oracle(w: &[f64], set: &ScheduleSet) -> usize {
    debug_assert_eq!(w.len(), set.dim());
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, atom) in set.atoms().iter().enumerate() {
        let val: f64 = atom
            .iter()
            .zip(w)
            .filter(|(&a, _)| a != 0)
            .map(|(&a, &wj)| f64::from(a) * wj)
            .sum();
        if val > best_val {
            best_val = val;
            best = i;
        }
    }
    best
}

/// Linear oracle over the atoms truncated at `cap`, i.e. over `S_cap`.
///
/// Returns the truncated maximizer `sigma ∧ cap`. Ties are broken
/// lexicographically on the truncated vectors, which gives the same answer as
/// running [`linear_oracle`] on `set.truncate(cap)`.
pub fn capped_linear_oracle(w: &[f64], cap: &[u64], set: &ScheduleSet) -> Vec<u32> {
    let mut best: Option<(f64, Vec<u32>)> = None;
    let mut cand = vec![0u32; set.dim()];
    for atom in set.atoms() {
        for ((c, &a), &k) in cand.iter_mut().zip(atom).zip(cap) {
            *c = if u64::from(a) <= k { a } else { k as u32 };
        }
        let val: f64 = cand
            .iter()
            .zip(w)
            .filter(|(&a, _)| a != 0)
            .map(|(&a, &wj)| f64::from(a) * wj)
            .sum();
        let better = match &best {
            None => true,
            Some((bv, bm)) => val > *bv || (val == *bv && cand < *bm),
        };
        if better {
            best = Some((val, cand.clone()));
        }
    }
    best.map(|(_, m)| m).unwrap_or_else(|| vec![0; set.dim()])
}
