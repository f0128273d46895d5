//! Goodness-of-fit statistics and the report record shared by all suites.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laws::LawDescriptor;
use crate::numerics::pairwise_sum;
use crate::rng::Seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GofReport {
    pub test_name: String,
    pub sample_size: usize,
    pub replicas: usize,
    pub statistic: f64,
    pub critical_value: f64,
    pub pass: bool,
    pub seed: Seed,
}

impl GofReport {
    /// `pass` is derived: statistic ≤ critical value (NaN fails).
    pub fn new(test_name: impl Into<String>, sample_size: usize, replicas: usize, statistic: f64, critical_value: f64, seed: Seed) -> Self {
        Self {
            test_name: test_name.into(),
            sample_size,
            replicas,
            statistic,
            critical_value,
            pass: statistic <= critical_value,
            seed,
        }
    }
}

/// Reference for a KS comparison.
#[derive(Clone, Copy)]
pub enum Reference<'a> {
    Law(LawDescriptor),
    Cdf(&'a dyn Fn(f64) -> f64),
    Sample(&'a [f64]),
}

fn sorted_copy(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Sup-distance between the empirical CDF of `sample` and a continuous CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::Empty);
    }
    let s = sorted_copy(sample);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Two-sample sup-distance between empirical CDFs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty);
    }
    let (a, b) = (sorted_copy(a), sorted_copy(b));
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    Ok(d)
}

pub fn ks_distance(sample: &[f64], reference: Reference<'_>) -> Result<f64> {
    match reference {
        Reference::Law(law) => ks_one_sample(sample, |x| law.cdf(x)),
        Reference::Cdf(f) => ks_one_sample(sample, f),
        Reference::Sample(other) => ks_two_sample(sample, other),
    }
}

/// W₂ between two uniform atomic measures given by sorted atoms of equal count.
pub fn wasserstein2_sorted(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.is_empty() {
        return Err(Error::Empty);
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).collect();
    Ok((pairwise_sum(&d) / a.len() as f64).sqrt())
}

/// Binomial standard deviation of an empirical frequency estimating p.
pub fn binomial_sigma(p: f64, trials: usize) -> f64 {
    let p = p.clamp(0.0, 1.0);
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_examples() {
        let s = [0.3, 0.1, 0.7];
        assert_eq!(ks_two_sample(&s, &s).unwrap(), 0.0);
        let u = LawDescriptor::UniformInterval { a: 0.0, b: 1.0 };
        assert!((ks_distance(&[0.5], Reference::Law(u)).unwrap() - 0.5).abs() < 1e-15);
        let m = 200;
        let grid: Vec<f64> = (0..m).map(|k| (k as f64 + 0.5) / m as f64).collect();
        assert!(ks_distance(&grid, Reference::Law(u)).unwrap() <= 1.0 / m as f64);
        assert_eq!(ks_one_sample(&[], |x| x), Err(Error::Empty));
    }

    #[test]
    fn two_sample_with_ties() {
        let d = ks_two_sample(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn wasserstein_examples() {
        assert_eq!(wasserstein2_sorted(&[0.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(wasserstein2_sorted(&[0.2, 0.4], &[0.2, 0.4]).unwrap(), 0.0);
        assert_eq!(wasserstein2_sorted(&[0.0, 2.0], &[1.0, 3.0]).unwrap(), 1.0);
        assert!(wasserstein2_sorted(&[0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn report_pass_rule() {
        let s = Seed::new(1, 2);
        assert!(GofReport::new("x", 1, 1, 0.1, 0.1, s).pass);
        assert!(!GofReport::new("x", 1, 1, 0.2, 0.1, s).pass);
        assert!(!GofReport::new("x", 1, 1, f64::NAN, 0.1, s).pass);
    }
}
