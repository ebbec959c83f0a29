//! Small statistics toolkit: means, least squares, seeded bootstrap,
//! Kolmogorov-Smirnov distances and the half-normal reference law.

use rand::Rng;
use serde::{Deserialize, Serialize};
use libm::erf;

use crate::seeds::stream_rng;
use crate::{Error, Result};

/// Point estimate with standard error and a two-sided interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub estimate: f64,
    pub stderr: f64,
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (0 for fewer than two points).
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Mean with a normal-approximation 95% interval.
pub fn mean_interval(xs: &[f64]) -> Interval {
    let (m, se) = (mean(xs), std_error(xs));
    Interval { estimate: m, stderr: se, low: m - 1.96 * se, high: m + 1.96 * se }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn least_squares(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::DegenerateGrid(format!("{} points", x.len())));
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateGrid("regressor has no spread".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if x.len() > 2 {
        let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (rss / (x.len() - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LineFit { slope, intercept, slope_stderr })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub seed: u64,
    /// Two-sided coverage, e.g. 0.95.
    pub level_permille: u32,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self { resamples: 1000, seed: 0, level_permille: 950 }
    }
}

/// Percentile bootstrap over `units` (resampled with replacement).
/// `statistic` receives the chosen unit indices.
pub fn bootstrap<F>(units: usize, cfg: BootstrapConfig, statistic: F) -> Result<Interval>
where
    F: Fn(&[usize]) -> f64,
{
    if units == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let all: Vec<usize> = (0..units).collect();
    let estimate = statistic(&all);
    let mut rng = stream_rng(cfg.seed, 0xB007);
    let mut pick = vec![0usize; units];
    let mut stats = Vec::with_capacity(cfg.resamples);
    for _ in 0..cfg.resamples {
        for slot in pick.iter_mut() {
            *slot = rng.random_range(0..units);
        }
        stats.push(statistic(&pick));
    }
    stats.sort_by(f64::total_cmp);
    let stderr = variance(&stats).sqrt();
    if stats.is_empty() {
        return Ok(Interval { estimate, stderr: 0.0, low: estimate, high: estimate });
    }
    let tail = (1.0 - cfg.level_permille as f64 / 1000.0) / 2.0;
    let at = |q: f64| stats[((q * (stats.len() - 1) as f64).round() as usize).min(stats.len() - 1)];
    Ok(Interval { estimate, stderr, low: at(tail), high: at(1.0 - tail) })
}

/// CDF of `|N(0, t)|`.
pub fn half_normal_cdf(x: f64, t: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        erf(x / (2.0 * t).sqrt())
    }
}

/// `E|B_t| = sqrt(2t/pi)`.
pub fn half_normal_mean(t: f64) -> f64 {
    (2.0 * t / std::f64::consts::PI).sqrt()
}

/// Limiting smoothed heat-kernel profile `sqrt(2/(pi t)) exp(-x^2/(2t))`.
pub fn gaussian_profile(x: f64, t: f64) -> f64 {
    (2.0 / (std::f64::consts::PI * t)).sqrt() * (-x * x / (2.0 * t)).exp()
}

/// Kolmogorov-Smirnov distance between the empirical law of `samples` and `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Sample excess-free kurtosis `E(x - m)^4 / var^2`.
pub fn kurtosis(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let n = xs.len() as f64;
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    m4 / (m2 * m2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_slope() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let fit = least_squares(&x, &y).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12 && (fit.intercept - 3.0).abs() < 1e-12);
        assert!(least_squares(&[1.0], &[1.0]).is_err());
        assert!(least_squares(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn bootstrap_is_reproducible() {
        let data: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let stat = |idx: &[usize]| idx.iter().map(|&i| data[i]).sum::<f64>() / idx.len() as f64;
        let cfg = BootstrapConfig { resamples: 200, seed: 7, level_permille: 950 };
        let a = bootstrap(data.len(), cfg, stat).unwrap();
        let b = bootstrap(data.len(), cfg, stat).unwrap();
        assert_eq!(a, b);
        assert!(a.low <= a.estimate && a.estimate <= a.high);
    }

    #[test]
    fn half_normal_reference() {
        let v = half_normal_cdf(1.0, 1.0);
        assert!((v - 0.682_689_492_137_085_9).abs() < 1e-12, "{v}");
        assert!((gaussian_profile(0.0, 1.0) - 0.797_884_560_802_865_4).abs() < 1e-15);
        assert_eq!(half_normal_cdf(-1.0, 1.0), 0.0);
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }
}
