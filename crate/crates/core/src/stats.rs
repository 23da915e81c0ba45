//! Small Monte Carlo estimators with normal-approximation and Wilson
//! confidence intervals.

use serde::{Deserialize, Serialize};

/// One-sided 99% standard normal quantile.
pub const Z_ONE_SIDED_99: f64 = 2.326_347_874_040_841;
/// Two-sided 99% standard normal quantile.
pub const Z_TWO_SIDED_99: f64 = 2.575_829_303_548_901;

/// Sample mean with a symmetric confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub lower: f64,
    pub upper: f64,
    pub samples: usize,
}

impl Estimate {
    /// Mean and standard error of `values`, with a CI of `z` standard errors.
    pub fn from_samples(values: &[f64], z: f64) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std_err: f64::NAN,
                lower: f64::NAN,
                upper: f64::NAN,
                samples: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let std_err = (var / n as f64).sqrt();
        Self {
            mean,
            std_err,
            lower: mean - z * std_err,
            upper: mean + z * std_err,
            samples: n,
        }
    }

    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn within_sigmas(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_err
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Unbiased sample variance together with its standard error, assuming
/// finite fourth moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub variance: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl VarianceEstimate {
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
        let variance = m2 * n / (n - 1.0);
        let std_err = ((m4 - m2 * m2) / n).max(0.0).sqrt();
        Self {
            variance,
            std_err,
            samples: values.len(),
        }
    }

    pub fn within_sigmas(&self, value: f64, k: f64) -> bool {
        (self.variance - value).abs() <= k * self.std_err
    }
}

/// Binomial proportion with a Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub successes: usize,
    pub trials: usize,
}

impl Proportion {
    pub fn wilson(successes: usize, trials: usize, z: f64) -> Self {
        if trials == 0 {
            return Self {
                estimate: f64::NAN,
                lower: 0.0,
                upper: 1.0,
                successes,
                trials,
            };
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Self {
            estimate: p,
            lower: (centre - half).max(0.0),
            upper: (centre + half).min(1.0),
            successes,
            trials,
        }
    }
}

/// Least-squares slope and intercept of `ys` against `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_of_constant_has_zero_width() {
        let e = Estimate::from_samples(&[2.0; 10], Z_TWO_SIDED_99);
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.lower, e.upper);
    }

    #[test]
    fn wilson_interval_at_zero_successes_is_nondegenerate() {
        let p = Proportion::wilson(0, 100, Z_TWO_SIDED_99);
        assert_eq!(p.estimate, 0.0);
        assert_eq!(p.lower, 0.0);
        assert!(p.upper > 0.0 && p.upper < 0.1);
    }

    #[test]
    fn fit_recovers_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| -0.5 * x + 3.0).collect();
        let (s, c) = linear_fit(&xs, &ys);
        assert!((s + 0.5).abs() < 1e-12);
        assert!((c - 3.0).abs() < 1e-12);
    }
}
