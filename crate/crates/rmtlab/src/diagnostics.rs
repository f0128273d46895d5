//! Small singular values and invertibility: row distances, the distance
//! sandwich for s_n, Monte Carlo experiments on the lower spectrum edge,
//! incompressible vectors, and concentration harnesses.

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::numerics::{linear_fit, mean};
use crate::rng::{sample_iid_matrix, EntryLaw, Seed};
use crate::spectral::singular_values;
use crate::stats::{binomial_sigma, ks_two_sample, wasserstein2_sorted, GofReport};
use crate::transforms::{quaternionic_transform, QPoint, QTransform};

/// Orthonormal basis of the span of the columns of `v`, by column-pivoted QR
/// with diagonal entries below `tol` discarded.
fn column_span(v: &Mat<Complex64>, tol: f64) -> Mat<Complex64> {
    if v.ncols() == 0 {
        return Mat::zeros(v.nrows(), 0);
    }
    let qr = v.col_piv_qr();
    let r = qr.thin_R();
    let rank = (0..r.nrows().min(r.ncols())).take_while(|&k| r[(k, k)].norm() > tol).count();
    let q = qr.compute_thin_Q();
    Mat::from_fn(v.nrows(), rank, |i, j| q[(i, j)])
}

fn distances_unchecked(a: &ComplexMatrix) -> Vec<f64> {
    let n = a.nrows();
    let m = a.ncols();
    let scale = a.frobenius_norm_sq().sqrt().max(f64::MIN_POSITIVE);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let others = Mat::from_fn(m, n - 1, |r, c| a.get(if c < i { c } else { c + 1 }, r));
            let q = column_span(&others, 1e-13 * scale);
            let x: Vec<Complex64> = a.row(i);
            let mut resid = x.clone();
            for k in 0..q.ncols() {
                let mut dot = Complex64::new(0.0, 0.0);
                for r in 0..m {
                    dot += q[(r, k)].conj() * x[r];
                }
                for r in 0..m {
                    resid[r] -= dot * q[(r, k)];
                }
            }
            resid.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
        })
        .collect()
}

/// dist(R_i, span{R_j : j ≠ i}) for every row, by orthogonal projection.
/// Rejects matrices with s_n ≤ 10⁻¹²·‖A‖₂.
pub fn row_distances(a: &ComplexMatrix) -> Result<Vec<f64>> {
    a.check_square()?;
    a.check_finite()?;
    let s = singular_values(a)?;
    if s.is_empty() {
        return Err(Error::Empty);
    }
    if s.smallest() <= 1e-12 * s.largest() {
        return Err(Error::RankDeficient { s_min: s.smallest() });
    }
    Ok(distances_unchecked(a))
}

/// n^{-1/2}·min dist ≤ s_n ≤ min dist.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SvSandwich {
    pub lower: f64,
    pub upper: f64,
    pub s_min: f64,
}

impl SvSandwich {
    pub fn holds(&self, slack: f64) -> bool {
        self.lower <= self.s_min + slack && self.s_min <= self.upper + slack
    }
}

pub fn smallest_sv_bounds_check(a: &ComplexMatrix) -> Result<SvSandwich> {
    a.check_square()?;
    a.check_finite()?;
    let n = a.nrows();
    if n == 0 {
        return Err(Error::Empty);
    }
    let d = distances_unchecked(a);
    let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
    let s_min = singular_values(a)?.smallest();
    Ok(SvSandwich { lower: dmin / (n as f64).sqrt(), upper: dmin, s_min })
}

/// One replica of the lower-edge profile: rows (i, s_{n−i}, ĉ·i/n).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SmallSvReplica {
    pub c_hat: f64,
    pub rows: Vec<(usize, f64, f64)>,
    /// Least-squares slope of log s_{n−i} against log i.
    pub log_slope: f64,
}

/// Singular values of n^{-1/2}X + shift·I against the linear profile i/n for
/// i ∈ [n^{0.8}, n − 1]; ĉ is the largest constant with s_{n−i} ≥ ĉ·i/n.
/// Replica r uses `seed.child(r)`.
pub fn small_sv_count_experiment(n: usize, law: EntryLaw, shift: Complex64, replicas: usize, seed: Seed) -> Result<Vec<SmallSvReplica>> {
    if n < 50 {
        return Err(Error::InvalidDimension(format!("n must be at least 50, got {n}")));
    }
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            let x = sample_iid_matrix(n, law, seed.child(r as u64))?;
            let a = x.scaled(1.0 / (n as f64).sqrt()).shifted(-shift);
            Ok(small_sv_profile(singular_values(&a)?.values()))
        })
        .collect()
}

/// Lower-edge profile of a descending singular value list.
pub fn small_sv_profile(s: &[f64]) -> SmallSvReplica {
    let n = s.len();
    let start = (n as f64).powf(0.8).ceil() as usize;
    let idx: Vec<usize> = (start.max(1)..n).collect();
    let nf = n as f64;
    let c_hat = idx.iter().map(|&i| s[n - i - 1] / (i as f64 / nf)).fold(f64::INFINITY, f64::min);
    let rows = idx.iter().map(|&i| (i, s[n - i - 1], c_hat * i as f64 / nf)).collect();
    let lx: Vec<f64> = idx.iter().map(|&i| (i as f64).ln()).collect();
    let ly: Vec<f64> = idx.iter().map(|&i| s[n - i - 1].ln()).collect();
    let log_slope = if idx.len() >= 2 { linear_fit(&lx, &ly).1 } else { f64::NAN };
    SmallSvReplica { c_hat, rows, log_slope }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TailCurve {
    pub n: usize,
    pub replicas: usize,
    pub t: Vec<f64>,
    /// Empirical P(√n·s_n(X + M) ≤ t).
    pub probability: Vec<f64>,
    /// Smallest ĉ with probability ≤ ĉ(t + n^{-1/2}) on the grid.
    pub c_hat: f64,
}

/// Monte Carlo curve t ↦ P(s_n(X + M) ≤ t/√n) with M = s·I.
pub fn smallest_sv_tail_experiment(n: usize, law: EntryLaw, shift_norm: f64, replicas: usize, t_grid: &[f64], seed: Seed) -> Result<TailCurve> {
    if replicas < 200 {
        return Err(Error::InsufficientSamples { need: 200, got: replicas });
    }
    if n == 0 {
        return Err(Error::InvalidDimension("n must be positive".into()));
    }
    let shift = Complex64::new(shift_norm, 0.0);
    let smin: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let x = sample_iid_matrix(n, law, seed.child(r as u64))?;
            Ok(singular_values(&x.shifted(-shift))?.smallest())
        })
        .collect::<Result<_>>()?;
    let sq = (n as f64).sqrt();
    let probability: Vec<f64> = t_grid
        .iter()
        .map(|&t| smin.iter().filter(|&&s| sq * s <= t).count() as f64 / replicas as f64)
        .collect();
    let c_hat = t_grid
        .iter()
        .zip(&probability)
        .map(|(t, p)| p / (t + 1.0 / sq))
        .fold(0.0, f64::max);
    Ok(TailCurve { n, replicas, t: t_grid.to_vec(), probability, c_hat })
}

/// Fraction of replicas whose matrix is numerically singular
/// (s_n ≤ n·ε·s_1).
pub fn singularity_frequency(n: usize, law: EntryLaw, replicas: usize, seed: Seed) -> Result<f64> {
    let hits: Vec<bool> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let x = sample_iid_matrix(n, law, seed.child(r as u64))?;
            let s = singular_values(&x)?;
            Ok(s.smallest() <= n as f64 * f64::EPSILON * s.largest())
        })
        .collect::<Result<_>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / replicas.max(1) as f64)
}

/// Indices π = π₁ ∩ π₂ with ρ/√n ≤ |x_i| ≤ √(2/(δn)), |π| ≥ δn/2, for a unit
/// vector at distance > ρ from every ⌊δn⌋-sparse vector.
pub fn incompressible_support(x: &[Complex64], delta: f64, rho: f64) -> Result<Vec<usize>> {
    let n = x.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    if !(delta > 0.0 && delta <= 1.0 && rho > 0.0) {
        return Err(Error::InvalidParameter(format!("need 0 < delta ≤ 1 and rho > 0, got {delta}, {rho}")));
    }
    let norm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("vector must have unit norm, got {norm}")));
    }
    let k = (delta * n as f64).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[b].norm().total_cmp(&x[a].norm()));
    let distance = order[k.min(n)..].iter().map(|&i| x[i].norm_sqr()).sum::<f64>().sqrt();
    if distance <= rho {
        let mut approximant = vec![Complex64::new(0.0, 0.0); n];
        for &i in &order[..k.min(n)] {
            approximant[i] = x[i];
        }
        return Err(Error::Compressible { approximant, distance });
    }
    let nf = n as f64;
    let (lo, hi) = (rho / nf.sqrt(), (2.0 / (delta * nf)).sqrt());
    let pi: Vec<usize> = (0..n).filter(|&i| x[i].norm() >= lo && x[i].norm() <= hi).collect();
    if (pi.len() as f64) < delta * nf / 2.0 {
        return Err(Error::Numerical(format!("spread set has {} < δn/2 indices", pi.len())));
    }
    Ok(pi)
}

/// Test functions of total variation at most 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    Constant { value: f64 },
    /// 1 on (−∞, s].
    Indicator { s: f64 },
    /// C¹ step from 1 to 0 across [s, s + width].
    Ramp { s: f64, width: f64 },
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Constant { value } => value,
            TestFunction::Indicator { s } => {
                if x <= s {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::Ramp { s, width } => {
                let u = ((x - s) / width).clamp(0.0, 1.0);
                1.0 - u * u * (3.0 - 2.0 * u)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::Constant { .. } => "constant",
            TestFunction::Indicator { .. } => "indicator",
            TestFunction::Ramp { .. } => "ramp",
        }
    }
}

/// Deviation frequencies of ∫f dν_{n^{-1/2}X} around its replica mean, checked
/// against 2exp(−2nt²) + 3σ at each t. Replica r uses `seed.child(r)`.
/// All functions in `fs` are evaluated on the same replicas.
pub fn concentration_experiment(n: usize, law: EntryLaw, fs: &[TestFunction], replicas: usize, ts: &[f64], seed: Seed) -> Result<Vec<GofReport>> {
    if replicas < 2 {
        return Err(Error::InsufficientSamples { need: 2, got: replicas });
    }
    let scale = 1.0 / (n as f64).sqrt();
    let spectra: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let x = sample_iid_matrix(n, law, seed.child(r as u64))?;
            Ok(singular_values(&x)?.iter().map(|v| v * scale).collect())
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for f in fs {
        let values: Vec<f64> = spectra
            .iter()
            .map(|s| {
                let v: Vec<f64> = s.iter().map(|&x| f.eval(x)).collect();
                mean(&v)
            })
            .collect();
        let m = mean(&values);
        for &t in ts {
            let freq = values.iter().filter(|v| (*v - m).abs() >= t).count() as f64 / replicas as f64;
            let bound = (2.0 * (-2.0 * n as f64 * t * t).exp()).min(1.0);
            let crit = bound + 3.0 * binomial_sigma(bound, replicas);
            out.push(GofReport::new(format!("concentration-{}-t{t}", f.name()), n, replicas, freq, crit, seed));
        }
    }
    Ok(out)
}

/// Deviation frequencies of ‖Γ − mean Γ‖₂ for Γ = Γ_{n^{-1/2}X}(q), against
/// 2exp(−n Im(η)² t²/8) + 3σ.
pub fn quaternionic_concentration(n: usize, law: EntryLaw, q: &QPoint, replicas: usize, ts: &[f64], seed: Seed) -> Result<Vec<GofReport>> {
    if replicas < 2 {
        return Err(Error::InsufficientSamples { need: 2, got: replicas });
    }
    let scale = 1.0 / (n as f64).sqrt();
    let gammas: Vec<QTransform> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let x = sample_iid_matrix(n, law, seed.child(r as u64))?;
            quaternionic_transform(&x.scaled(scale), q)
        })
        .collect::<Result<_>>()?;
    let m = QTransform::mean(&gammas);
    let dev: Vec<f64> = gammas.iter().map(|g| g.sub(&m).operator_norm()).collect();
    let eta2 = q.eta.im * q.eta.im;
    Ok(ts
        .iter()
        .map(|&t| {
            let freq = dev.iter().filter(|&&d| d >= t).count() as f64 / replicas as f64;
            let bound = (2.0 * (-(n as f64) * eta2 * t * t / 8.0).exp()).min(1.0);
            let crit = bound + 3.0 * binomial_sigma(bound, replicas);
            GofReport::new(format!("quaternionic-concentration-t{t}"), n, replicas, freq, crit, seed)
        })
        .collect())
}

/// W₂ between ν_{n^{-1/2}X} and ν of the entrywise truncation at κ, with the
/// Hoffman–Wielandt bound √((1/n²)Σ|X_ij|²1{|X_ij|>κ}).
pub fn truncation_w2(x: &ComplexMatrix, kappa: f64) -> Result<(f64, f64)> {
    x.check_square()?;
    let n = x.nrows() as f64;
    let scale = 1.0 / n.sqrt();
    let cut = x.map(|v| if v.norm() > kappa { Complex64::new(0.0, 0.0) } else { v });
    let mut a: Vec<f64> = singular_values(&x.scaled(scale))?.iter().copied().collect();
    let mut b: Vec<f64> = singular_values(&cut.scaled(scale))?.iter().copied().collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let w2 = wasserstein2_sorted(&a, &b)?;
    let removed = x.map(|v| if v.norm() > kappa { v } else { Complex64::new(0.0, 0.0) });
    Ok((w2, (removed.frobenius_norm_sq() / (n * n)).sqrt()))
}

/// Sup-distance between the singular value distributions of A and B.
pub fn singular_cdf_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let sa = singular_values(a)?;
    let sb = singular_values(b)?;
    ks_two_sample(sa.values(), sb.values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::sample_iid_matrix;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn distances_of_simple_matrices() {
        let d = row_distances(&ComplexMatrix::identity(2)).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-14 && (d[1] - 1.0).abs() < 1e-14);
        let d = row_distances(&ComplexMatrix::diagonal(&[c(1.0), c(10.0)])).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-13 && (d[1] - 10.0).abs() < 1e-12);
        assert!(matches!(row_distances(&ComplexMatrix::shift(4)), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn sandwich_on_identity_and_shift() {
        let s = smallest_sv_bounds_check(&ComplexMatrix::identity(4)).unwrap();
        assert!((s.lower - 0.5).abs() < 1e-14 && (s.upper - 1.0).abs() < 1e-14 && (s.s_min - 1.0).abs() < 1e-14);
        let s = smallest_sv_bounds_check(&ComplexMatrix::shift(5)).unwrap();
        assert!(s.s_min < 1e-14 && s.upper < 1e-14);
    }

    #[test]
    fn incompressible_examples() {
        let n = 50;
        let u = vec![c(1.0 / (n as f64).sqrt()); n];
        assert_eq!(incompressible_support(&u, 0.1, 0.1).unwrap().len(), n);
        let mut e1 = vec![c(0.0); n];
        e1[0] = c(1.0);
        match incompressible_support(&e1, 0.1, 0.1) {
            Err(Error::Compressible { approximant, distance }) => {
                assert_eq!(distance, 0.0);
                assert_eq!(approximant, e1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn profile_scales_with_matrix() {
        let x = sample_iid_matrix(60, EntryLaw::RealGaussian, Seed::new(3, 0)).unwrap();
        let s = singular_values(&x).unwrap();
        let s2: Vec<f64> = s.iter().map(|v| 2.0 * v).collect();
        assert_eq!(small_sv_profile(&s2).c_hat, 2.0 * small_sv_profile(s.values()).c_hat);
    }

    #[test]
    fn constant_function_has_no_deviation() {
        let r = concentration_experiment(20, EntryLaw::RealGaussian, &[TestFunction::Constant { value: 0.3 }], 10, &[0.0], Seed::new(1, 0))
            .unwrap();
        assert_eq!(r[0].statistic, 1.0);
        let r = concentration_experiment(20, EntryLaw::RealGaussian, &[TestFunction::Constant { value: 0.3 }], 10, &[1e-12], Seed::new(1, 0))
            .unwrap();
        assert_eq!(r[0].statistic, 0.0);
    }
}
