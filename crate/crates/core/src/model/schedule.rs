use crate::error::ValidationError;

/// A finite set of integer service vectors, one component per link.
///
/// Atoms are kept sorted lexicographically and deduplicated, so "the first
/// maximizer in storage order" is also "the lexicographically smallest
/// maximizer". The linear oracle relies on this.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleSet {
    dim: usize,
    atoms: Vec<Vec<u32>>,
    sigma_max: u32,
}

impl ScheduleSet {
    /// Builds a validated schedule set. `link_names` is used only for error messages.
    pub fn new(link_names: &[String], atoms: Vec<Vec<u32>>) -> Result<Self, ValidationError> {
        let dim = link_names.len();
        if atoms.is_empty() {
            return Err(ValidationError::NoSchedules);
        }
        for (index, atom) in atoms.iter().enumerate() {
            if atom.len() != dim {
                return Err(ValidationError::ScheduleDimension {
                    index,
                    found: atom.len(),
                    expected: dim,
                });
            }
        }
        if !atoms.iter().any(|a| a.iter().all(|&c| c == 0)) {
            return Err(ValidationError::MissingZeroSchedule);
        }
        for (j, name) in link_names.iter().enumerate() {
            if !atoms.iter().any(|a| a[j] >= 1) {
                return Err(ValidationError::LinkNeverServed { link: name.clone() });
            }
        }
        Ok(Self::from_atoms_unchecked(dim, atoms))
    }

    /// Like [`ScheduleSet::new`] but with generated link names `#0, #1, ...`.
    pub fn from_atoms(dim: usize, atoms: Vec<Vec<u32>>) -> Result<Self, ValidationError> {
        let names: Vec<String> = (0..dim).map(|j| format!("#{j}")).collect();
        Self::new(&names, atoms)
    }

    /// Builds a set without checking the zero-vector and coverage invariants.
    /// Truncated sets use this: a truncated set need not serve every link.
    pub(crate) fn from_atoms_unchecked(dim: usize, mut atoms: Vec<Vec<u32>>) -> Self {
        atoms.sort_unstable();
        atoms.dedup();
        let sigma_max = atoms
            .iter()
            .flat_map(|a| a.iter().copied())
            .max()
            .unwrap_or(0);
        ScheduleSet {
            dim,
            atoms,
            sigma_max,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Vec<u32>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn sigma_max(&self) -> u32 {
        self.sigma_max
    }

    /// Position of `atom` in storage order, if present.
    pub fn index_of(&self, atom: &[u32]) -> Option<usize> {
        self.atoms
            .binary_search_by(|probe| probe.as_slice().cmp(atom))
            .ok()
    }

    /// True when `q >= sigma_max` componentwise, i.e. truncation by `q` is the identity.
    pub fn dominated_by(&self, q: &[u64]) -> bool {
        q.iter().all(|&qj| qj >= u64::from(self.sigma_max))
    }

    /// The schedules available at queue state `q`: `{ sigma ∧ q : sigma in S }`.
    pub fn truncate(&self, q: &[u64]) -> ScheduleSet {
        assert_eq!(q.len(), self.dim, "queue vector has wrong dimension");
        if self.dominated_by(q) {
            return self.clone();
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                a.iter()
                    .zip(q)
                    .map(|(&s, &qj)| u64::from(s).min(qj) as u32)
                    .collect()
            })
            .collect();
        Self::from_atoms_unchecked(self.dim, atoms)
    }

    /// Index of the zero schedule (always present in validated and truncated sets).
    pub fn zero_index(&self) -> usize {
        // The zero vector is the lexicographic minimum.
        debug_assert!(self.atoms[0].iter().all(|&c| c == 0));
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(atoms: &[&[u32]]) -> ScheduleSet {
        ScheduleSet::from_atoms(atoms[0].len(), atoms.iter().map(|a| a.to_vec()).collect()).unwrap()
    }

    #[test]
    fn missing_zero_is_rejected() {
        let err = ScheduleSet::from_atoms(2, vec![vec![1, 0], vec![0, 1]]).unwrap_err();
        assert_eq!(err, ValidationError::MissingZeroSchedule);
        assert_eq!(err.to_string(), "zero schedule missing");
    }

    #[test]
    fn uncovered_link_is_rejected() {
        let err = ScheduleSet::from_atoms(2, vec![vec![0, 0], vec![1, 0]]).unwrap_err();
        assert!(matches!(err, ValidationError::LinkNeverServed { .. }));
    }

    #[test]
    fn truncation_takes_componentwise_min() {
        let s = set(&[&[0, 0], &[2, 0], &[0, 1]]);
        let t = s.truncate(&[1, 5]);
        assert_eq!(t.atoms(), &[vec![0, 0], vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn truncation_by_zero_leaves_only_zero() {
        let s = set(&[&[0, 0], &[2, 0], &[0, 1], &[1, 1]]);
        assert_eq!(s.truncate(&[0, 0]).atoms(), &[vec![0, 0]]);
    }

    #[test]
    fn truncation_by_large_queue_is_identity() {
        let s = set(&[&[0, 0], &[2, 0], &[0, 1]]);
        assert_eq!(s.truncate(&[2, 7]), s);
        assert_eq!(s.truncate(&[9, 9]), s);
    }

    #[test]
    fn atoms_are_sorted_and_deduplicated() {
        let s = set(&[&[1, 0], &[0, 1], &[0, 0], &[1, 0]]);
        assert_eq!(s.atoms(), &[vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert_eq!(s.index_of(&[1, 0]), Some(2));
        assert_eq!(s.index_of(&[1, 1]), None);
        assert_eq!(s.sigma_max(), 1);
    }
}
