use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named random streams split from one master seed, so that different
/// policies can be compared under common random numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Arrivals = 1,
    Scheduler = 2,
    Selection = 3,
}

pub fn stream_rng(master_seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream as u64);
    rng
}

/// Per-slot arrival distribution. All three kinds have finite second moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrivalKind {
    /// At most one packet per slot; mean must lie in `[0, 1]`.
    Bernoulli,
    Poisson,
    /// Batches of fixed size released as a fluid credit accumulates.
    DeterministicBatch,
}

/// Arrival generator for a fixed set of streams (one per route).
#[derive(Debug, Clone)]
pub struct ArrivalProcess {
    kind: ArrivalKind,
    means: Vec<f64>,
    batch: u32,
    credit: Vec<f64>,
    rng: ChaCha8Rng,
}

impl ArrivalProcess {
    pub fn new(kind: ArrivalKind, means: &[f64], batch: u32, seed: u64) -> Result<Self> {
        for (i, &m) in means.iter().enumerate() {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::Arrivals(format!("stream {i} has invalid mean {m}")));
            }
            if kind == ArrivalKind::Bernoulli && m > 1.0 {
                return Err(Error::Arrivals(format!(
                    "stream {i}: bernoulli mean {m} exceeds 1"
                )));
            }
        }
        if batch == 0 {
            return Err(Error::Arrivals("batch size must be positive".into()));
        }
        let mut rng = stream_rng(seed, Stream::Arrivals);
        // Random initial phase so that deterministic streams are not all aligned.
        let credit = means
            .iter()
            .map(|_| rng.random::<f64>() * f64::from(batch))
            .collect();
        Ok(ArrivalProcess {
            kind,
            means: means.to_vec(),
            batch,
            credit,
            rng,
        })
    }

    pub fn kind(&self) -> ArrivalKind {
        self.kind
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Draws one slot of arrivals, one count per stream.
    pub fn sample(&mut self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.means.len());
        for i in 0..self.means.len() {
            let m = self.means[i];
            let a = match self.kind {
                ArrivalKind::Bernoulli => {
                    let d = Bernoulli::new(m).expect("mean validated");
                    u64::from(d.sample(&mut self.rng))
                }
                ArrivalKind::Poisson => {
                    if m == 0.0 {
                        0
                    } else {
                        let d = Poisson::new(m).expect("mean validated");
                        d.sample(&mut self.rng) as u64
                    }
                }
                ArrivalKind::DeterministicBatch => {
                    let b = f64::from(self.batch);
                    self.credit[i] += m;
                    if self.credit[i] >= b {
                        self.credit[i] -= b;
                        u64::from(self.batch)
                    } else {
                        0
                    }
                }
            };
            out.push(a);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empirical_mean(kind: ArrivalKind, mean: f64, n: usize) -> f64 {
        let mut p = ArrivalProcess::new(kind, &[mean], 3, 11).unwrap();
        (0..n).map(|_| p.sample()[0] as f64).sum::<f64>() / n as f64
    }

    #[test]
    fn means_match() {
        let n = 200_000;
        // Bernoulli(0.3): sd of the mean ~ 0.001
        assert!((empirical_mean(ArrivalKind::Bernoulli, 0.3, n) - 0.3).abs() < 0.005);
        assert!((empirical_mean(ArrivalKind::Poisson, 1.7, n) - 1.7).abs() < 0.015);
        assert!((empirical_mean(ArrivalKind::DeterministicBatch, 0.45, n) - 0.45).abs() < 1e-4);
    }

    #[test]
    fn bernoulli_mean_above_one_rejected() {
        assert!(ArrivalProcess::new(ArrivalKind::Bernoulli, &[1.2], 1, 0).is_err());
        assert!(ArrivalProcess::new(ArrivalKind::Poisson, &[-0.1], 1, 0).is_err());
    }

    #[test]
    fn same_seed_same_sequence() {
        let mut a = ArrivalProcess::new(ArrivalKind::Poisson, &[0.5, 0.2], 1, 42).unwrap();
        let mut b = ArrivalProcess::new(ArrivalKind::Poisson, &[0.5, 0.2], 1, 42).unwrap();
        for _ in 0..100 {
            assert_eq!(a.sample(), b.sample());
        }
    }
}
