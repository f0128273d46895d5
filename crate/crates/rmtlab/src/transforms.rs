//! Logarithmic potential, Cauchy–Stieltjes transform, logarithmic energy and
//! the quaternionic resolvent transform Γ_A(q) with density recovery.
//!
//! Stieltjes transforms are normalized: m_μ(z) = ∫(λ − z)⁻¹dμ(λ), so for a
//! matrix spectrum m = (1/n)·Tr((A − z)⁻¹).

use std::f64::consts::PI;

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{Mat, Side};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::numerics::{linear_fit, pairwise_sum, pairwise_sum_complex};
use crate::spectral::{log_abs_det, singular_values};

fn collides(lambda: Complex64, z: Complex64) -> bool {
    (lambda - z).norm() < 1e-14 * (1.0 + z.norm())
}

/// U_μ(z) = −(1/n) Σ log|λ_i − z|.
pub fn log_potential_empirical(atoms: &[Complex64], z: Complex64) -> Result<f64> {
    if atoms.is_empty() {
        return Err(Error::Empty);
    }
    let mut logs = Vec::with_capacity(atoms.len());
    for (i, &l) in atoms.iter().enumerate() {
        if collides(l, z) {
            return Err(Error::AtomCollision { index: i });
        }
        logs.push((l - z).norm().ln());
    }
    Ok(-pairwise_sum(&logs) / atoms.len() as f64)
}

/// Potential of the uniform law on the disc of radius κ:
/// −log|z| outside, (1 − |z|²/κ²)/2 − log κ inside.
pub fn log_potential_circular(z: Complex64, kappa: f64) -> f64 {
    if !(kappa > 0.0) {
        return f64::NAN;
    }
    let r = z.norm();
    if r > kappa { -r.ln() } else { 0.5 * (1.0 - (r / kappa).powi(2)) - kappa.ln() }
}

/// −(1/n) log|det(A − z)|.
pub fn log_potential_det(a: &ComplexMatrix, z: Complex64) -> Result<f64> {
    Ok(-log_abs_det(&a.shifted(z))? / a.nrows() as f64)
}

/// −∫ log s dν_{A−z}(s).
pub fn log_potential_hermitized(a: &ComplexMatrix, z: Complex64) -> Result<f64> {
    let s = singular_values(&a.shifted(z))?;
    let logs: Vec<f64> = s.iter().map(|x| x.ln()).collect();
    Ok(-pairwise_sum(&logs) / s.len() as f64)
}

/// ∫ (λ − z)⁻¹ dμ for an atomic measure on ℂ.
pub fn cauchy_stieltjes(atoms: &[Complex64], z: Complex64) -> Result<Complex64> {
    if atoms.is_empty() {
        return Err(Error::Empty);
    }
    let mut terms = Vec::with_capacity(atoms.len());
    for (i, &l) in atoms.iter().enumerate() {
        if collides(l, z) {
            return Err(Error::AtomCollision { index: i });
        }
        terms.push(1.0 / (l - z));
    }
    Ok(pairwise_sum_complex(&terms) / atoms.len() as f64)
}

/// ∫ (x − z)⁻¹ dν for an atomic measure on ℝ.
pub fn cauchy_stieltjes_real(atoms: &[f64], z: Complex64) -> Result<Complex64> {
    let c: Vec<Complex64> = atoms.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    cauchy_stieltjes(&c, z)
}

/// m_{ν̌}(η) = (1/n) Σ η/(s_i² − η²) for the symmetrization of ν = (1/n)Σδ_{s_i}.
pub fn symmetrized_stieltjes(singular: &[f64], eta: Complex64) -> Complex64 {
    let terms: Vec<Complex64> = singular.iter().map(|&s| eta / (s * s - eta * eta)).collect();
    pairwise_sum_complex(&terms) / singular.len() as f64
}

/// (1/n) Tr((A − z)⁻¹) by LU.
pub fn resolvent_trace(a: &ComplexMatrix, z: Complex64) -> Result<Complex64> {
    a.check_square()?;
    let inv = a.shifted(z).as_faer().partial_piv_lu().inverse();
    let d: Vec<Complex64> = (0..a.nrows()).map(|i| inv[(i, i)]).collect();
    let m = pairwise_sum_complex(&d) / a.nrows() as f64;
    if m.re.is_finite() && m.im.is_finite() {
        Ok(m)
    } else {
        Err(Error::Numerical(format!("A - z is singular at z = {z}")))
    }
}

/// Evaluation point q(z, η) = [[η, z], [z̄, η]] with Im η > 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QPoint {
    pub z: Complex64,
    pub eta: Complex64,
}

impl QPoint {
    pub fn new(z: Complex64, eta: Complex64) -> Result<Self> {
        if eta.im > 0.0 {
            Ok(Self { z, eta })
        } else {
            Err(Error::InvalidParameter(format!("Im eta must be positive, got {eta}")))
        }
    }

    /// q(z, it).
    pub fn imaginary(z: Complex64, t: f64) -> Result<Self> {
        Self::new(z, Complex64::new(0.0, t))
    }

    /// −q⁻¹, the transform of the zero operator.
    pub fn neg_inverse(&self) -> QTransform {
        let det = self.eta * self.eta - self.z.norm_sqr();
        QTransform { a: -self.eta / det, b: self.z / det, c: self.z.conj() / det, d: -self.eta / det }
    }
}

/// Γ = [[a, b], [c, d]]. For a square matrix d = a, and c = b̄ when η ∈ iℝ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QTransform {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl QTransform {
    pub fn operator_norm(&self) -> f64 {
        let f2 = self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr();
        let det = (self.a * self.d - self.b * self.c).norm();
        ((f2 + (f2 * f2 - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt()
    }

    pub fn sub(&self, o: &QTransform) -> QTransform {
        QTransform { a: self.a - o.a, b: self.b - o.b, c: self.c - o.c, d: self.d - o.d }
    }

    pub fn mean(items: &[QTransform]) -> QTransform {
        let n = items.len() as f64;
        let pick = |f: fn(&QTransform) -> Complex64| {
            let v: Vec<Complex64> = items.iter().map(f).collect();
            pairwise_sum_complex(&v) / n
        };
        QTransform { a: pick(|q| q.a), b: pick(|q| q.b), c: pick(|q| q.c), d: pick(|q| q.d) }
    }
}

/// Γ_A(q) from the SVD A − z = UΣV*: a = (1/n)Σ η/(s²−η²),
/// b = (1/n)Σ s/(s²−η²)·(V*U)_ii, c = (1/n)Σ s/(s²−η²)·(U*V)_ii.
pub fn quaternionic_transform(a_mat: &ComplexMatrix, q: &QPoint) -> Result<QTransform> {
    a_mat.check_square()?;
    a_mat.check_finite()?;
    let n = a_mat.nrows();
    let m = a_mat.shifted(q.z);
    let svd = m.as_faer().svd().map_err(|_| Error::NoConvergence)?;
    let (u, v, s) = (svd.U(), svd.V(), svd.S());
    let eta = q.eta;
    let mut at = Vec::with_capacity(n);
    let mut bt = Vec::with_capacity(n);
    let mut ct = Vec::with_capacity(n);
    for i in 0..n {
        let si = s[i].re;
        let den = si * si - eta * eta;
        // (V*U)_ii = <v_i, u_i>
        let mut vu = Complex64::new(0.0, 0.0);
        for k in 0..n {
            vu += v[(k, i)].conj() * u[(k, i)];
        }
        at.push(eta / den);
        bt.push(si * vu / den);
        ct.push(si * vu.conj() / den);
    }
    let nf = n as f64;
    let a = pairwise_sum_complex(&at) / nf;
    Ok(QTransform { a, b: pairwise_sum_complex(&bt) / nf, c: pairwise_sum_complex(&ct) / nf, d: a })
}

/// Γ_A(q) by inverting the 2n×2n matrix [[−η, A − z], [(A − z)*, −η]] and
/// averaging its 2×2 diagonal blocks.
pub fn quaternionic_transform_direct(a_mat: &ComplexMatrix, q: &QPoint) -> Result<QTransform> {
    a_mat.check_square()?;
    a_mat.check_finite()?;
    let n = a_mat.nrows();
    let m = a_mat.shifted(q.z);
    let k = Mat::<Complex64>::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => if i == j { -q.eta } else { Complex64::new(0.0, 0.0) },
        (true, false) => m.get(i, j - n),
        (false, true) => m.get(j, i - n).conj(),
        (false, false) => if i == j { -q.eta } else { Complex64::new(0.0, 0.0) },
    });
    let r = k.partial_piv_lu().inverse();
    let avg = |f: &dyn Fn(usize) -> Complex64| {
        let v: Vec<Complex64> = (0..n).map(f).collect();
        pairwise_sum_complex(&v) / n as f64
    };
    Ok(QTransform {
        a: avg(&|i| r[(i, i)]),
        b: avg(&|i| r[(i, n + i)]),
        c: avg(&|i| r[(n + i, i)]),
        d: avg(&|i| r[(n + i, n + i)]),
    })
}

/// b(z, it) = (1/n)·Tr((A − z)((A − z)*(A − z) + t²)⁻¹) through a Cholesky solve.
pub fn b_at(a_mat: &ComplexMatrix, z: Complex64, t: f64) -> Result<Complex64> {
    let n = a_mat.nrows();
    let m = a_mat.shifted(z);
    let mr = m.as_faer();
    let mut g = mr.adjoint() * mr;
    for i in 0..n {
        g[(i, i)] += Complex64::new(t * t, 0.0);
    }
    let llt = g.llt(Side::Lower).map_err(|_| Error::Numerical("Gram matrix not positive definite".into()))?;
    let x = llt.solve(mr);
    let d: Vec<Complex64> = (0..n).map(|i| x[(i, i)]).collect();
    Ok(pairwise_sum_complex(&d) / n as f64)
}

/// Uniform axis `start, start + step, …` with `count` points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Axis {
    /// Parses `a:b:step` (inclusive of b up to rounding).
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || Error::InvalidParameter(format!("grid '{text}' is not of the form a:b:step"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let v: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        Self::from_bounds(v[0], v[1], v[2])
    }

    pub fn from_bounds(a: f64, b: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !a.is_finite() || !b.is_finite() || b < a {
            return Err(Error::InvalidParameter(format!("empty or invalid grid {a}:{b}:{step}")));
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        Ok(Self { start: a, step, count })
    }

    pub fn point(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.point(k)).collect()
    }
}

/// Rectangular z-lattice, row-major with the imaginary axis outermost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub re: Axis,
    pub im: Axis,
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.re.count * self.im.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, idx: usize) -> Complex64 {
        Complex64::new(self.re.point(idx % self.re.count), self.im.point(idx / self.re.count))
    }

    pub fn points(&self) -> Vec<Complex64> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }
}

/// b-field of a matrix on a lattice at η = it.
pub fn b_field(a_mat: &ComplexMatrix, lattice: &Lattice, t: f64) -> Result<Vec<Complex64>> {
    a_mat.check_square()?;
    a_mat.check_finite()?;
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    (0..lattice.len()).into_par_iter().map(|k| b_at(a_mat, lattice.point(k), t)).collect()
}

/// b-field of the normal matrix diag(atoms): (1/n)Σ(λ − z)/(|λ − z|² + t²).
pub fn b_field_normal(atoms: &[Complex64], lattice: &Lattice, t: f64) -> Result<Vec<Complex64>> {
    if atoms.is_empty() {
        return Err(Error::Empty);
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    Ok(lattice
        .points()
        .into_par_iter()
        .map(|z| {
            let v: Vec<Complex64> = atoms.iter().map(|&l| (l - z) / ((l - z).norm_sqr() + t * t)).collect();
            pairwise_sum_complex(&v) / atoms.len() as f64
        })
        .collect())
}

/// Pointwise least-squares line in t through several b-fields, evaluated at t = 0.
pub fn extrapolate_fields(ts: &[f64], fields: &[Vec<Complex64>]) -> Vec<Complex64> {
    let len = fields[0].len();
    (0..len)
        .map(|k| {
            let re: Vec<f64> = fields.iter().map(|f| f[k].re).collect();
            let im: Vec<f64> = fields.iter().map(|f| f[k].im).collect();
            if ts.len() == 1 {
                return fields[0][k];
            }
            Complex64::new(linear_fit(ts, &re).0, linear_fit(ts, &im).0)
        })
        .collect()
}

/// Density recovered on a lattice, with discretization diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub lattice: Lattice,
    pub density: Vec<f64>,
    /// Imaginary part of −(1/π)∂b, zero in the continuum limit.
    pub imaginary: Vec<f64>,
    /// Lattice indices where the density dips below −0.05.
    pub negative_dips: Vec<usize>,
}

fn derivative(f: &dyn Fn(usize) -> Complex64, k: usize, count: usize, h: f64) -> Complex64 {
    if count >= 5 && k >= 2 && k + 2 < count {
        (-f(k + 2) + 8.0 * f(k + 1) - 8.0 * f(k - 1) + f(k - 2)) / (12.0 * h)
    } else if k >= 1 && k + 1 < count {
        (f(k + 1) - f(k - 1)) / (2.0 * h)
    } else if k == 0 {
        (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
    } else {
        (3.0 * f(k) - 4.0 * f(k - 1) + f(k - 2)) / (2.0 * h)
    }
}

/// −(1/π)∂b with ∂ = (∂_x − i∂_y)/2 by finite differences on the lattice.
pub fn recover_density_from_b(field: &[Complex64], lattice: &Lattice) -> Result<DensityGrid> {
    let (nx, ny) = (lattice.re.count, lattice.im.count);
    if nx < 3 || ny < 3 {
        return Err(Error::InvalidParameter(format!("lattice too coarse: {nx}x{ny}, need at least 3 points per axis")));
    }
    if field.len() != nx * ny {
        return Err(Error::LengthMismatch { left: field.len(), right: nx * ny });
    }
    let mut density = Vec::with_capacity(nx * ny);
    let mut imaginary = Vec::with_capacity(nx * ny);
    let mut negative_dips = Vec::new();
    for iy in 0..ny {
        for ix in 0..nx {
            let bx = derivative(&|k| field[iy * nx + k], ix, nx, lattice.re.step);
            let by = derivative(&|k| field[k * nx + ix], iy, ny, lattice.im.step);
            let dbar = 0.5 * (bx - Complex64::i() * by);
            let rho = -dbar / PI;
            if rho.re < -0.05 {
                negative_dips.push(iy * nx + ix);
            }
            density.push(rho.re);
            imaginary.push(rho.im);
        }
    }
    Ok(DensityGrid { lattice: *lattice, density, imaginary, negative_dips })
}

/// E(μ) = −(1/n²) Σ_{i≠j} log|z_i − z_j|.
pub fn log_energy(atoms: &[Complex64]) -> Result<f64> {
    let n = atoms.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    let rows: Vec<Result<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = Vec::with_capacity(n - i);
            for j in i + 1..n {
                let d = (atoms[i] - atoms[j]).norm();
                if d == 0.0 {
                    return Err(Error::DuplicateAtoms { first: i, second: j });
                }
                acc.push(d.ln());
            }
            Ok(pairwise_sum(&acc))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(-2.0 * pairwise_sum(&rows) / (n * n) as f64)
}

/// (1/2)(E(μ) + ∫|z|²dμ) − 3/8, which vanishes at the circular law.
pub fn ldp_rate(atoms: &[Complex64]) -> Result<f64> {
    let e = log_energy(atoms)?;
    let m2: Vec<f64> = atoms.iter().map(|z| z.norm_sqr()).collect();
    Ok(0.5 * (e + pairwise_sum(&m2) / atoms.len() as f64) - 0.375)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn potential_examples() {
        let u = log_potential_empirical(&[c(1.0, 0.0)], c(3.0, 0.0)).unwrap();
        assert!((u + 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_potential_circular(c(0.0, 0.0), 1.0), 0.5);
        assert!(log_potential_circular(c(1.0, 0.0), 1.0).abs() < 1e-15);
        assert!(log_potential_circular(c(1.0 + 1e-12, 0.0), 1.0).abs() < 1e-11);
        assert!((log_potential_circular(c(2.0, 0.0), 1.0) + 2f64.ln()).abs() < 1e-15);
        assert_eq!(
            log_potential_empirical(&[c(0.5, 0.0)], c(0.5, 0.0)),
            Err(Error::AtomCollision { index: 0 })
        );
    }

    #[test]
    fn stieltjes_examples() {
        assert!((cauchy_stieltjes(&[c(0.0, 0.0)], c(0.0, 1.0)).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
        assert!((cauchy_stieltjes(&[c(1.0, 0.0)], c(0.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(cauchy_stieltjes(&[c(1.0, 0.0)], c(1.0, 0.0)).is_err());
    }

    #[test]
    fn zero_matrix_transform() {
        let q = QPoint::imaginary(c(0.0, 0.0), 0.5).unwrap();
        let g = quaternionic_transform(&ComplexMatrix::zeros(1, 1), &q).unwrap();
        assert!((g.a - c(0.0, 2.0)).norm() < 1e-15);
        assert!(g.b.norm() < 1e-15);
        let gd = quaternionic_transform_direct(&ComplexMatrix::zeros(1, 1), &q).unwrap();
        assert!((gd.a - c(0.0, 2.0)).norm() < 1e-15);
        assert!(QPoint::new(c(0.0, 0.0), c(1.0, 0.0)).is_err());
        let z = c(0.3, -0.2);
        let q = QPoint::imaginary(z, 0.1).unwrap();
        let g = quaternionic_transform(&ComplexMatrix::zeros(3, 3), &q).unwrap();
        assert!((g.b + z / (z.norm_sqr() + 0.01)).norm() < 1e-14);
        assert!((b_at(&ComplexMatrix::zeros(3, 3), z, 0.1).unwrap() - g.b).norm() < 1e-14);
        let neg = q.neg_inverse();
        assert!((neg.a - g.a).norm() < 1e-14 && (neg.b - g.b).norm() < 1e-14);
    }

    #[test]
    fn axis_parsing() {
        let a = Axis::parse("0:2:0.01").unwrap();
        assert_eq!(a.count, 201);
        assert!((a.point(200) - 2.0).abs() < 1e-12);
        assert!(Axis::parse("1:0:0.1").is_err());
        assert!(Axis::parse("0:1").is_err());
        assert!(Axis::parse("0:1:0").is_err());
    }

    #[test]
    fn constant_field_has_zero_density() {
        let ax = Axis::from_bounds(-1.0, 1.0, 0.25).unwrap();
        let lat = Lattice { re: ax, im: ax };
        let field = vec![c(0.7, -0.2); lat.len()];
        let g = recover_density_from_b(&field, &lat).unwrap();
        assert!(g.density.iter().all(|d| d.abs() < 1e-12));
        let small = Lattice { re: Axis::from_bounds(0.0, 0.1, 0.1).unwrap(), im: ax };
        assert!(recover_density_from_b(&vec![c(0.0, 0.0); small.len()], &small).is_err());
    }

    #[test]
    fn energy_examples() {
        assert_eq!(log_energy(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap(), 0.0);
        let e = log_energy(&[c(0.0, 0.0), c(2.0, 0.0)]).unwrap();
        assert!((e + 2f64.ln() / 2.0).abs() < 1e-15);
        assert!(matches!(log_energy(&[c(1.0, 0.0), c(1.0, 0.0)]), Err(Error::DuplicateAtoms { .. })));
    }
}
