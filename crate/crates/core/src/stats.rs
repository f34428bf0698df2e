//! Small experiment statistics: Wilson score intervals and the chi-square
//! survival function used by the sampler self-check.

use thiserror::Error;

use crate::special::{regularized_upper_gamma, SpecialError};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// Wilson score interval for a binomial proportion at `z` standard
/// deviations (z = 1.959964 for 95%, z = 3 for the 3-sigma checks).
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// A Monte Carlo estimate with both the usual 95% and the 3-sigma Wilson
/// intervals attached.
#[derive(Debug, Clone, serde::Serialize)]
pub struct McEstimate {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub wilson95: (f64, f64),
    pub wilson3s: (f64, f64),
}

impl McEstimate {
    pub fn new(successes: u64, trials: u64) -> Self {
        McEstimate {
            successes,
            trials,
            rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
            wilson95: wilson_interval(successes, trials, 1.959964),
            wilson3s: wilson_interval(successes, trials, 3.0),
        }
    }

    pub fn contains_3s(&self, p: f64) -> bool {
        self.wilson3s.0 <= p && p <= self.wilson3s.1
    }
}

/// Survival function of the chi-square distribution with `df` degrees of
/// freedom: `P(X > stat) = Q(df/2, stat/2)`.
pub fn chi_square_sf(stat: f64, df: u32) -> Result<f64, StatsError> {
    if !(stat >= 0.0) {
        return Err(StatsError::Invalid(format!("statistic must be >= 0, got {stat}")));
    }
    if df == 0 {
        return Err(StatsError::Invalid("degrees of freedom must be positive".into()));
    }
    Ok(regularized_upper_gamma(df as f64 / 2.0, stat / 2.0)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_basic_shape() {
        let (lo, hi) = wilson_interval(50, 100, 1.959964);
        assert!(lo < 0.5 && 0.5 < hi);
        assert!((hi - lo) < 0.25);
        let (lo0, hi0) = wilson_interval(0, 100, 3.0);
        assert_eq!(lo0, 0.0);
        assert!(hi0 > 0.0 && hi0 < 0.12);
        let (l, h) = wilson_interval(0, 0, 2.0);
        assert_eq!((l, h), (0.0, 1.0));
    }

    #[test]
    fn wilson_narrows_with_trials() {
        let (a_lo, a_hi) = wilson_interval(500, 1000, 3.0);
        let (b_lo, b_hi) = wilson_interval(50_000, 100_000, 3.0);
        assert!(b_hi - b_lo < a_hi - a_lo);
    }

    #[test]
    fn chi_square_reference_values() {
        // df=1: sf(3.841) ~ 0.05; sf(23.93) ~ 1e-6
        let p = chi_square_sf(3.841, 1).unwrap();
        assert!((p - 0.05).abs() < 2e-3);
        let p = chi_square_sf(23.93, 1).unwrap();
        assert!(p > 0.5e-6 && p < 2e-6);
        // df=4: sf(0) = 1
        assert!((chi_square_sf(0.0, 4).unwrap() - 1.0).abs() < 1e-12);
    }
}
