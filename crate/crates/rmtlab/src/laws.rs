//! Limiting laws and exact finite-n Ginibre formulas, plus the finite-variance
//! fixed point α = (α + η)/(|z|² − (α + η)²) describing ν_z.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numerics::{bisect, extrapolate_to_zero};
use crate::special::ln_gamma_p;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Default ε schedule for boundary-value extrapolation of densities.
pub const DEFAULT_EPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// π⁻¹√(4 − x²) on [0, 2].
pub fn quarter_circular_density(x: f64) -> f64 {
    if (0.0..=2.0).contains(&x) { (4.0 - x * x).sqrt() / PI } else { 0.0 }
}

pub fn quarter_circular_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        (0.5 * x * (4.0 - x * x).sqrt() + 2.0 * (0.5 * x).asin()) / PI
    }
}

/// CDF of |Z| for Z uniform on the unit disc.
pub fn circular_modulus_cdf(r: f64) -> f64 {
    (r * r).clamp(0.0, 1.0)
}

/// Density of the uniform law on the disc of radius κ.
pub fn circular_density(z: Complex64, kappa: f64) -> f64 {
    if z.norm() <= kappa { 1.0 / (PI * kappa * kappa) } else { 0.0 }
}

/// Mean eigenvalue density φ_{n,1}(z) = (nπ)⁻¹ e^{−|z|²} Σ_{ℓ<n} |z|^{2ℓ}/ℓ!,
/// accumulated in log space.
pub fn ginibre_mean_density(n: usize, z: Complex64) -> f64 {
    assert!(n >= 1, "n must be at least 1");
    let x = z.norm_sqr();
    if x == 0.0 {
        return 1.0 / (n as f64 * PI);
    }
    let lx = x.ln();
    let terms: Vec<f64> = (0..n).map(|l| l as f64 * lx - ln_gamma(l as f64 + 1.0)).collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = terms.iter().map(|t| (t - top).exp()).sum();
    (top + s.ln() - x - (n as f64 * PI).ln()).exp()
}

/// Correlation kernel K_n(z, w) = π⁻¹ e^{−(|z|²+|w|²)/2} Σ_{ℓ<n} (z w̄)^ℓ/ℓ!.
pub fn ginibre_kernel(n: usize, z: Complex64, w: Complex64) -> Complex64 {
    let p = z * w.conj();
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for l in 1..n {
        term *= p / l as f64;
        sum += term;
    }
    sum * (-(z.norm_sqr() + w.norm_sqr()) / 2.0).exp() / PI
}

/// P(|λ₁(G)| ≤ √n r) = Π_{k≤n} P(Gamma(k,1) ≤ n r²).
pub fn kostlan_radius_cdf(n: usize, r: f64) -> f64 {
    assert!(n >= 1, "n must be at least 1");
    if r <= 0.0 {
        return 0.0;
    }
    let x = n as f64 * r * r;
    let s: f64 = (1..=n).map(|k| ln_gamma_p(k as f64, x)).sum();
    s.exp()
}

/// γ_n = log(n/2π) − 2 log log n.
pub fn gumbel_gamma(n: usize) -> Result<f64> {
    let nf = n as f64;
    let g = if n >= 2 { (nf / (2.0 * PI)).ln() - 2.0 * nf.ln().ln() } else { f64::NEG_INFINITY };
    if g > 0.0 {
        Ok(g)
    } else {
        Err(Error::InvalidDimension(format!(
            "gamma_n = log(n/2pi) - 2 log log n must be positive; got n = {n}, the smallest admissible n is {}",
            gumbel_min_n()
        )))
    }
}

fn gumbel_min_n() -> usize {
    (2..).find(|&n| {
        let nf = n as f64;
        (nf / (2.0 * PI)).ln() - 2.0 * nf.ln().ln() > 0.0
    })
    .expect("gamma_n eventually positive")
}

/// √(4nγ_n)·(radius − 1 − √(γ_n/4n)).
pub fn gumbel_standardize(n: usize, radius: f64) -> Result<f64> {
    let g = gumbel_gamma(n)?;
    let nf = n as f64;
    Ok((4.0 * nf * g).sqrt() * (radius - 1.0 - (g / (4.0 * nf)).sqrt()))
}

/// Centering 1 + √(γ_n/4n) of the spectral radius of n^{-1/2}G.
pub fn gumbel_center(n: usize) -> Result<f64> {
    Ok(1.0 + (gumbel_gamma(n)? / (4.0 * n as f64)).sqrt())
}

pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

/// √(max(0, 1 − |z|²)).
pub fn circular_h_limit(z: Complex64) -> f64 {
    (1.0 - z.norm_sqr()).max(0.0).sqrt()
}

/// The three roots α of the fixed-point cubic, through w = α + η:
/// w³ − ηw² + (1 − |z|²)w + η|z|² = 0.
pub fn nu_z_cubic_roots(z: Complex64, eta: Complex64) -> [Complex64; 3] {
    let r = z.norm_sqr();
    let (a, b, c) = (-eta, Complex64::new(1.0 - r, 0.0), eta * r);
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let mut u3 = -q / 2.0 + disc;
    if u3.norm() < (-q / 2.0 - disc).norm() {
        u3 = -q / 2.0 - disc;
    }
    let u = u3.powf(1.0 / 3.0);
    let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let cubic = |w: Complex64| ((w + a) * w + b) * w + c;
    let dcubic = |w: Complex64| (3.0 * w + 2.0 * a) * w + b;
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    let mut uk = u;
    for root in roots.iter_mut() {
        let y = if uk.norm() == 0.0 { Complex64::new(0.0, 0.0) } else { uk - p / (3.0 * uk) };
        let mut w = y - a / 3.0;
        for _ in 0..3 {
            let d = dcubic(w);
            if d.norm() == 0.0 {
                break;
            }
            let step = cubic(w) / d;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            w -= step;
        }
        *root = w - eta;
        uk *= omega;
    }
    roots
}

fn fixed_point_residual(z: Complex64, eta: Complex64, alpha: Complex64) -> f64 {
    let w = alpha + eta;
    (alpha - w / (z.norm_sqr() - w * w)).norm()
}

/// The unique root α ∈ ℂ₊ of α = (α + η)/(|z|² − (α + η)²).
pub fn nu_z_fixed_point(z: Complex64, eta: Complex64) -> Result<Complex64> {
    if !(eta.im > 0.0) {
        return Err(Error::InvalidParameter(format!("Im eta must be positive, got {eta}")));
    }
    if eta.re == 0.0 {
        let (t, r) = (eta.im, z.norm_sqr());
        let h = bisect(|h| (1.0 + t / h) / (r + (h + t) * (h + t)) - 1.0, 1e-300, 1.0 / t, 1e-13)?;
        return Ok(Complex64::new(0.0, h));
    }
    let upper: Vec<Complex64> = nu_z_cubic_roots(z, eta).into_iter().filter(|a| a.im > 0.0).collect();
    if upper.len() == 1 {
        return Ok(upper[0]);
    }
    nu_z_homotopy(z, eta)
}

/// Follows the ℂ₊ root continuously from Im η = max(1, Im η) down to Im η.
fn nu_z_homotopy(z: Complex64, eta: Complex64) -> Result<Complex64> {
    let start = eta.im.max(1.0);
    let steps = 200;
    let mut prev: Option<Complex64> = None;
    for k in 0..=steps {
        let t = start * (eta.im / start).powf(k as f64 / steps as f64);
        let roots = nu_z_cubic_roots(z, Complex64::new(eta.re, t));
        let pick = match prev {
            None => roots.into_iter().max_by(|a, b| a.im.total_cmp(&b.im)),
            Some(p) => roots.into_iter().min_by(|a, b| (a - p).norm().total_cmp(&(b - p).norm())),
        };
        prev = pick;
    }
    match prev {
        Some(a) if a.im > 0.0 && fixed_point_residual(z, eta, a) < 1e-6 => Ok(a),
        _ => Err(Error::Numerical(format!("no root in the upper half-plane at z={z}, eta={eta}"))),
    }
}

/// β(q) = −z/(|z|² − (α + η)²) at the fixed point α.
pub fn nu_z_beta(z: Complex64, eta: Complex64) -> Result<Complex64> {
    let w = nu_z_fixed_point(z, eta)? + eta;
    Ok(-z / (z.norm_sqr() - w * w))
}

/// Density of ν_z at x ≥ 0: (2/π)·Im α(q(z, x + iε)) extrapolated linearly to ε = 0.
pub fn nu_z_density(z: Complex64, x: f64, eps: &[f64]) -> Result<f64> {
    let vals = eps
        .iter()
        .map(|&e| nu_z_fixed_point(z, Complex64::new(x, e)).map(|a| 2.0 * a.im / PI))
        .collect::<Result<Vec<f64>>>()?;
    Ok(extrapolate_to_zero(eps, &vals))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LawDescriptor {
    /// Uniform on the disc of radius κ; as a law on ℝ₊ it is the law of the modulus.
    Circular { kappa: f64 },
    QuarterCircular,
    CircularModulus,
    UniformInterval { a: f64, b: f64 },
    Gumbel,
    ExponentialRateOne,
}

impl LawDescriptor {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            LawDescriptor::Circular { kappa } => circular_modulus_cdf(x / kappa),
            LawDescriptor::QuarterCircular => quarter_circular_cdf(x),
            LawDescriptor::CircularModulus => circular_modulus_cdf(x),
            LawDescriptor::UniformInterval { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            LawDescriptor::Gumbel => gumbel_cdf(x),
            LawDescriptor::ExponentialRateOne => {
                if x <= 0.0 { 0.0 } else { -(-x).exp_m1() }
            }
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        match *self {
            LawDescriptor::Circular { kappa } => {
                if (0.0..=kappa).contains(&x) { 2.0 * x / (kappa * kappa) } else { 0.0 }
            }
            LawDescriptor::QuarterCircular => quarter_circular_density(x),
            LawDescriptor::CircularModulus => {
                if (0.0..=1.0).contains(&x) { 2.0 * x } else { 0.0 }
            }
            LawDescriptor::UniformInterval { a, b } => {
                if (a..=b).contains(&x) { 1.0 / (b - a) } else { 0.0 }
            }
            LawDescriptor::Gumbel => (-x - (-x).exp()).exp(),
            LawDescriptor::ExponentialRateOne => {
                if x >= 0.0 { (-x).exp() } else { 0.0 }
            }
        }
    }

    /// Interval carrying all but a negligible part of the mass.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            LawDescriptor::Circular { kappa } => (0.0, kappa),
            LawDescriptor::QuarterCircular => (0.0, 2.0),
            LawDescriptor::CircularModulus => (0.0, 1.0),
            LawDescriptor::UniformInterval { a, b } => (a, b),
            LawDescriptor::Gumbel => (-5.0, 60.0),
            LawDescriptor::ExponentialRateOne => (0.0, 800.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_circle_values() {
        assert!((quarter_circular_density(0.0) - 2.0 / PI).abs() < 1e-15);
        assert_eq!(quarter_circular_density(2.0), 0.0);
        assert_eq!(quarter_circular_cdf(2.0), 1.0);
    }

    #[test]
    fn modulus_cdf_values() {
        assert_eq!(circular_modulus_cdf(0.0), 0.0);
        assert_eq!(circular_modulus_cdf(1.0), 1.0);
        assert!((circular_modulus_cdf(0.5f64.sqrt()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gumbel_gamma_at_thousand() {
        let g = gumbel_gamma(1000).unwrap();
        assert!((g - ((1000.0 / (2.0 * PI)).ln() - 2.0 * 6.907_755_278_982_137f64.ln())).abs() < 1e-12);
        assert!((g - 1.2044).abs() < 1e-3);
        assert!(gumbel_standardize(1000, gumbel_center(1000).unwrap()).unwrap().abs() < 1e-12);
        assert!(gumbel_gamma(10).is_err());
    }

    #[test]
    fn kostlan_cdf_small_cases() {
        assert!((kostlan_radius_cdf(1, 1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-14);
        assert_eq!(kostlan_radius_cdf(7, 0.0), 0.0);
    }

    #[test]
    fn fixed_point_roots_are_consistent() {
        let z = Complex64::new(0.3, -0.4);
        let eta = Complex64::new(0.7, 0.05);
        let a = nu_z_fixed_point(z, eta).unwrap();
        assert!(fixed_point_residual(z, eta, a) < 1e-12);
        for root in nu_z_cubic_roots(z, eta) {
            assert!(fixed_point_residual(z, eta, root) < 1e-9);
        }
    }
}
