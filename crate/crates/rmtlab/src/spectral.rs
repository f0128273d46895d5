//! Eigenvalues, singular values, bipartization and empirical spectral measures.

use std::f64::consts::PI;
use std::ops::Deref;

use faer::Side;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::numerics::pairwise_sum;

/// Phase in [0, 2π); zero maps to 0.
pub fn phase(z: Complex64) -> f64 {
    let p = z.im.atan2(z.re);
    if p < 0.0 { p + 2.0 * PI } else { p }
}

/// Eigenvalues ordered by decreasing modulus, ties by increasing phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(mut values: Vec<Complex64>) -> Self {
        values.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        let top = values.first().map_or(0.0, |z| z.norm());
        let tol = 1e-12 * top.max(f64::MIN_POSITIVE);
        let mut start = 0;
        while start < values.len() {
            let head = values[start].norm();
            let mut end = start + 1;
            while end < values.len() && head - values[end].norm() <= tol {
                end += 1;
            }
            values[start..end].sort_by(|a, b| phase(*a).total_cmp(&phase(*b)));
            start = end;
        }
        Self { values }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { values: self.values.iter().map(|z| z * s).collect() }
    }
}

impl Deref for Spectrum {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.values
    }
}

/// Singular values in descending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn smallest(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

impl Deref for SingularSpectrum {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// Uniform-weight atomic measure on ℂ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure2D {
    pub atoms: Vec<Complex64>,
}

/// Uniform-weight atomic measure on ℝ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure1D {
    pub atoms: Vec<f64>,
}

impl EmpiricalMeasure2D {
    pub fn weight(&self) -> f64 {
        1.0 / self.atoms.len() as f64
    }

    pub fn integrate(&self, f: impl Fn(Complex64) -> f64) -> f64 {
        let v: Vec<f64> = self.atoms.iter().map(|&z| f(z)).collect();
        pairwise_sum(&v) / self.atoms.len() as f64
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.atoms.iter().map(|z| z.norm()).collect()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.atoms.iter().map(|&z| phase(z)).collect()
    }
}

impl EmpiricalMeasure1D {
    pub fn weight(&self) -> f64 {
        1.0 / self.atoms.len() as f64
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let v: Vec<f64> = self.atoms.iter().map(|&x| f(x)).collect();
        pairwise_sum(&v) / self.atoms.len() as f64
    }

    /// Symmetrization (δ_s + δ_{−s})/2 of each atom.
    pub fn symmetrized(&self) -> EmpiricalMeasure1D {
        let mut atoms: Vec<f64> = self.atoms.iter().flat_map(|&s| [s, -s]).collect();
        atoms.sort_by(f64::total_cmp);
        EmpiricalMeasure1D { atoms }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.atoms.iter().filter(|&&a| a <= x).count() as f64 / self.atoms.len() as f64
    }
}

fn prepare(a: &ComplexMatrix) -> Result<()> {
    a.check_square()?;
    a.check_finite()
}

/// Eigenvalues via Hessenberg reduction and shifted QR. Real input goes
/// through the real Schur form so that conjugate pairs are exact.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Spectrum> {
    prepare(a)?;
    if a.nrows() == 0 {
        return Err(Error::InvalidDimension("empty matrix".into()));
    }
    let values = if a.is_real() {
        a.real_part().eigenvalues().map_err(|_| Error::NoConvergence)?
    } else {
        a.as_faer().eigenvalues().map_err(|_| Error::NoConvergence)?
    };
    Ok(Spectrum::new(values))
}

pub fn singular_values(a: &ComplexMatrix) -> Result<SingularSpectrum> {
    a.check_finite()?;
    let values = if a.is_real() {
        a.real_part().singular_values().map_err(|_| Error::NoConvergence)?
    } else {
        a.as_faer().singular_values().map_err(|_| Error::NoConvergence)?
    };
    Ok(SingularSpectrum::new(values))
}

/// Hermitian (m+n)×(m+n) matrix [[0, A], [A*, 0]].
pub fn bipartize(a: &ComplexMatrix) -> ComplexMatrix {
    let (m, n) = (a.nrows(), a.ncols());
    ComplexMatrix::from_fn(m + n, m + n, |i, j| {
        if i < m && j >= m {
            a.get(i, j - m)
        } else if i >= m && j < m {
            a.get(j, i - m).conj()
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Eigenvalues of a Hermitian matrix in ascending order (lower triangle read).
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    prepare(h)?;
    h.as_faer().self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::NoConvergence)
}

/// (μ, ν) of `scale · A`.
pub fn empirical_measures(a: &ComplexMatrix, scale: f64) -> Result<(EmpiricalMeasure2D, EmpiricalMeasure1D)> {
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
    }
    let ev = eigenvalues(a)?;
    let sv = singular_values(a)?;
    Ok((
        EmpiricalMeasure2D { atoms: ev.iter().map(|z| z * scale).collect() },
        EmpiricalMeasure1D { atoms: sv.iter().map(|s| s * scale).collect() },
    ))
}

/// Number of eigenvalues with |Im λ| ≤ tol.
pub fn real_eigenvalue_count(s: &Spectrum, tol: f64) -> usize {
    s.iter().filter(|z| z.im.abs() <= tol).count()
}

/// 10⁻⁷·√n·‖A‖₂.
pub fn default_real_tol(a: &ComplexMatrix) -> Result<f64> {
    let s1 = singular_values(a)?.largest();
    Ok(1e-7 * (a.nrows() as f64).sqrt() * s1)
}

/// Whether non-real eigenvalues pair up with their conjugates within `tol`.
pub fn conjugate_pairs_consistent(s: &Spectrum, tol: f64) -> bool {
    let mut upper: Vec<Complex64> = s.iter().copied().filter(|z| z.im > tol).collect();
    let mut lower: Vec<Complex64> = s.iter().map(|z| z.conj()).filter(|z| z.im > tol).collect();
    if upper.len() != lower.len() {
        return false;
    }
    let key = |z: &Complex64| (z.re, z.im);
    upper.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    lower.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    upper.iter().zip(&lower).all(|(a, b)| (a - b).norm() <= tol.max(1e-12))
}

/// log|det A| through partial-pivoting LU.
pub fn log_abs_det(a: &ComplexMatrix) -> Result<f64> {
    prepare(a)?;
    let lu = a.as_faer().partial_piv_lu();
    let u = lu.U();
    let logs: Vec<f64> = (0..a.nrows()).map(|i| u[(i, i)].norm().ln()).collect();
    Ok(pairwise_sum(&logs))
}
