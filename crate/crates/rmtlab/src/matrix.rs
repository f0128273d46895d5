//! Dense complex matrices.

use std::ops::{Add, Mul, Sub};

use faer::{Mat, MatRef};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix stored column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    inner: Mat<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { inner: Mat::zeros(rows, cols) }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self { inner: Mat::from_fn(rows, cols, f) }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::LengthMismatch { left: c, right: bad.len() });
        }
        Ok(Self::from_fn(r, c, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> =
            rows.iter().map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(d: &[Complex64]) -> Self {
        let n = d.len();
        Self::from_fn(n, n, |i, j| if i == j { d[i] } else { Complex64::new(0.0, 0.0) })
    }

    /// Nilpotent upper shift: ones on the first superdiagonal.
    pub fn shift(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if j == i + 1 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
    }

    /// Upper shift with `kappa` placed at the bottom-left corner; its n-th power is κ·I.
    pub fn cyclic_shift(n: usize, kappa: f64) -> Self {
        let mut m = Self::shift(n);
        if n > 0 {
            m.set(n - 1, 0, m.get(n - 1, 0) + kappa);
        }
        m
    }

    pub fn from_faer(inner: Mat<Complex64>) -> Self {
        Self { inner }
    }

    pub fn as_faer(&self) -> MatRef<'_, Complex64> {
        self.inner.as_ref()
    }

    pub fn into_faer(self) -> Mat<Complex64> {
        self.inner
    }

    pub fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.inner[(i, j)] = v;
    }

    pub fn row(&self, i: usize) -> Vec<Complex64> {
        (0..self.ncols()).map(|j| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.nrows()).map(|i| self.row(i)).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_fn(self.nrows(), self.ncols(), |i, j| self.get(i, j) * s)
    }

    /// A − zI.
    pub fn shifted(&self, z: Complex64) -> Self {
        Self::from_fn(self.nrows(), self.ncols(), |i, j| if i == j { self.get(i, j) - z } else { self.get(i, j) })
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.ncols(), self.nrows(), |i, j| self.get(j, i).conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_fn(self.nrows(), self.ncols(), |i, j| f(self.get(i, j)))
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        let mut acc = Vec::with_capacity(self.nrows() * self.ncols());
        for j in 0..self.ncols() {
            for i in 0..self.nrows() {
                acc.push(self.get(i, j).norm_sqr());
            }
        }
        crate::numerics::pairwise_sum(&acc)
    }

    /// All imaginary parts exactly zero.
    pub fn is_real(&self) -> bool {
        (0..self.ncols()).all(|j| (0..self.nrows()).all(|i| self.get(i, j).im == 0.0))
    }

    pub(crate) fn real_part(&self) -> Mat<f64> {
        Mat::from_fn(self.nrows(), self.ncols(), |i, j| self.inner[(i, j)].re)
    }

    pub fn check_finite(&self) -> Result<()> {
        for j in 0..self.ncols() {
            for i in 0..self.nrows() {
                let v = self.get(i, j);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn check_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare { rows: self.nrows(), cols: self.ncols() })
        }
    }

    /// Top-left k×k block.
    pub fn minor(&self, k: usize) -> Self {
        Self::from_fn(k, k, |i, j| self.get(i, j))
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner + &rhs.inner }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner - &rhs.inner }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner * &rhs.inner }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_and_cyclic_shift() {
        let a = ComplexMatrix::shift(3);
        assert_eq!(a.get(0, 1), Complex64::new(1.0, 0.0));
        assert_eq!(a.get(2, 0), Complex64::new(0.0, 0.0));
        let b = ComplexMatrix::cyclic_shift(3, 0.5);
        let b3 = &(&b * &b) * &b;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 0.5 } else { 0.0 };
                assert!((b3.get(i, j) - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn from_rows_rejects_ragged() {
        let rows = vec![vec![Complex64::new(1.0, 0.0)], vec![]];
        assert!(ComplexMatrix::from_rows(&rows).is_err());
    }

    #[test]
    fn finiteness_check() {
        let mut a = ComplexMatrix::identity(2);
        assert!(a.check_finite().is_ok());
        a.set(1, 0, Complex64::new(f64::NAN, 0.0));
        assert_eq!(a.check_finite(), Err(Error::NonFinite { row: 1, col: 0 }));
    }
}
