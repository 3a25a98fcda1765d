use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    StableLooking,
    Growing,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::StableLooking => "stable-looking",
            Verdict::Growing => "growing",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Thresholds for the finite-horizon stability heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticThresholds {
    /// "growing" when the slope exceeds this fraction of the mean arrival rate.
    pub growth_fraction: f64,
    /// "stable-looking" when |slope| is below this many standard errors.
    pub noise_multiplier: f64,
}

impl Default for DiagnosticThresholds {
    fn default() -> Self {
        DiagnosticThresholds {
            growth_fraction: 0.01,
            noise_multiplier: 3.0,
        }
    }
}

/// Least-squares trend of the total queue over the last half of a run.
///
/// This is a heuristic, not a proof of positive recurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityDiagnostic {
    pub slope: f64,
    /// Autocorrelation-robust (Newey-West) standard error of the slope.
    pub std_error: f64,
    pub arrival_rate: f64,
    pub thresholds: DiagnosticThresholds,
    pub verdict: Verdict,
}

/// OLS slope of `y` on `t` and its Newey-West standard error.
pub fn trend(t: &[f64], y: &[f64]) -> (f64, f64) {
    let n = t.len();
    if n < 3 {
        return (0.0, f64::INFINITY);
    }
    let nf = n as f64;
    let tm = t.iter().sum::<f64>() / nf;
    let ym = y.iter().sum::<f64>() / nf;
    let sxx: f64 = t.iter().map(|x| (x - tm).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, f64::INFINITY);
    }
    let sxy: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let slope = sxy / sxx;
    let icept = ym - slope * tm;
    // score terms u_i = (t_i - tm) * e_i
    let u: Vec<f64> = t
        .iter()
        .zip(y)
        .map(|(&ti, &yi)| (ti - tm) * (yi - icept - slope * ti))
        .collect();
    let lag = (4.0 * (nf / 100.0).powf(2.0 / 9.0)).floor() as usize;
    let mut s: f64 = u.iter().map(|x| x * x).sum();
    for l in 1..=lag.min(n - 1) {
        let w = 1.0 - l as f64 / (lag as f64 + 1.0);
        let c: f64 = (l..n).map(|i| u[i] * u[i - l]).sum();
        s += 2.0 * w * c;
    }
    let var = (s.max(0.0) / (sxx * sxx)) * nf / (nf - 2.0);
    (slope, var.sqrt())
}

/// Classifies samples `(slot, total)` using those in the last half of the
/// horizon.
pub fn diagnose(
    slots: &[u64],
    totals: &[u64],
    horizon: u64,
    arrival_rate: f64,
    thresholds: DiagnosticThresholds,
) -> StabilityDiagnostic {
    let half = horizon / 2;
    let (t, y): (Vec<f64>, Vec<f64>) = slots
        .iter()
        .zip(totals)
        .filter(|(s, _)| **s >= half)
        .map(|(&s, &q)| (s as f64, q as f64))
        .unzip();
    let (slope, std_error) = trend(&t, &y);
    let verdict = if slope > thresholds.growth_fraction * arrival_rate {
        Verdict::Growing
    } else if slope.abs() < thresholds.noise_multiplier * std_error {
        Verdict::StableLooking
    } else {
        Verdict::Inconclusive
    };
    StabilityDiagnostic {
        slope,
        std_error,
        arrival_rate,
        thresholds,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let t: Vec<f64> = (0..100).map(f64::from).collect();
        let y: Vec<f64> = t.iter().map(|x| 2.0 * x + 1.0).collect();
        let (s, se) = trend(&t, &y);
        assert!((s - 2.0).abs() < 1e-12);
        assert!(se < 1e-9);
    }

    #[test]
    fn verdicts() {
        let slots: Vec<u64> = (0..1000).collect();
        let grow: Vec<u64> = slots.iter().map(|s| s / 5).collect();
        assert_eq!(
            diagnose(&slots, &grow, 1000, 1.0, Default::default()).verdict,
            Verdict::Growing
        );
        // deterministic bounded oscillation
        let flat: Vec<u64> = slots.iter().map(|s| 10 + (s * 7919 % 13)).collect();
        assert_eq!(
            diagnose(&slots, &flat, 1000, 1.0, Default::default()).verdict,
            Verdict::StableLooking
        );
    }
}
