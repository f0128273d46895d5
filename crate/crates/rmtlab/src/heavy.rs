//! Heavy-tailed limits: the recursive distributional equations of the Poisson
//! weighted infinite tree, the limit densities g_α (eigenvalues) and ν_{α,z}
//! (singular values of A − z), tree resolvents and tail-index estimates.
//!
//! Scaling: entries satisfy t^α P(|X| ≥ t) → 1 and the matrix is n^{-1/α}X.

use std::cell::{Cell, RefCell};
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{extrapolate_to_zero, illinois, integrate, linear_fit, mean, pairwise_sum, std_error};
use crate::rng::{poisson_weights_with, sample_positive_stable, sample_pwit, Phase, PwitTree, Seed};
use crate::transforms::{QPoint, QTransform};

pub const MIN_BANK: usize = 1000;
const Y_LO: f64 = 1e-8;
const Y_HI: f64 = 1e8;
/// t used for rde_y at the origin when t = 0 is requested.
pub const ORIGIN_T: f64 = 1e-6;
const NEG_TOL: f64 = 1e-4;

/// Two independent arrays of draws of S with E e^{-xS} = exp(−Γ(1−α/2)x^{α/2}).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableSampleBank {
    pub alpha: f64,
    pub s: Vec<f64>,
    pub s_prime: Vec<f64>,
    pub seed: Seed,
}

impl StableSampleBank {
    pub fn generate(alpha: f64, count: usize, seed: Seed) -> Result<Self> {
        let (s, s_prime) = rayon::join(
            || sample_positive_stable(alpha, count, seed.child(0)),
            || sample_positive_stable(alpha, count, seed.child(1)),
        );
        Ok(Self { alpha, s: s?, s_prime: s_prime?, seed })
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    fn check(&self) -> Result<()> {
        if self.len() < MIN_BANK {
            return Err(Error::InsufficientSamples { need: MIN_BANK, got: self.len() });
        }
        Ok(())
    }

    /// Bank average of f(S, S′), summed in fixed chunks so the result does not
    /// depend on the thread count.
    pub fn mean_of(&self, f: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
        const CHUNK: usize = 1 << 13;
        let sums: Vec<f64> = self
            .s
            .par_chunks(CHUNK)
            .zip(self.s_prime.par_chunks(CHUNK))
            .map(|(a, b)| a.iter().zip(b).map(|(&s, &sp)| f(s, sp)).sum::<f64>())
            .collect();
        pairwise_sum(&sums) / self.len() as f64
    }
}

#[inline]
fn pow_half_alpha(x: f64, alpha: f64) -> f64 {
    if alpha == 1.0 { x.sqrt() } else { x.powf(0.5 * alpha) }
}

/// Ê[((t/y + S)/(r + (t+yS)(t+yS′)))^{α/2}] with r = |z|²; strictly decreasing in y.
pub fn y_functional(bank: &StableSampleBank, r: f64, t: f64, y: f64) -> f64 {
    let a = bank.alpha;
    if t == 0.0 {
        let y2 = y * y;
        bank.mean_of(|s, sp| pow_half_alpha(s / (r + y2 * s * sp), a))
    } else {
        bank.mean_of(|s, sp| pow_half_alpha((t / y + s) / (r + (t + y * s) * (t + y * sp)), a))
    }
}

fn solve_y(bank: &StableSampleBank, r: f64, t: f64, hint: Option<f64>) -> Result<(f64, f64)> {
    let g = |u: f64| y_functional(bank, r, t, u.exp()) - 1.0;
    let (mut lo, mut hi) = (Y_LO.ln(), Y_HI.ln());
    if let Some(u) = hint.filter(|h| *h > Y_LO && *h < Y_HI).map(f64::ln) {
        for w in [0.05, 0.5, 3.0] {
            let (a, b) = ((u - w).max(lo), (u + w).min(hi));
            if g(a) > 0.0 && g(b) < 0.0 {
                (lo, hi) = (a, b);
                break;
            }
        }
    }
    let u = illinois(g, lo, hi, 1e-12, 1e-14)
        .map_err(|_| Error::NotBracketed(format!("y-equation at |z|²={r}, t={t} not bracketed in [1e-8, 1e8]")))?;
    Ok((u.exp(), g(u).abs()))
}

/// Solved y-equation with its diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RdeSolution {
    pub z: Complex64,
    pub t: f64,
    pub y: f64,
    pub residual: f64,
    pub bank_size: usize,
    pub seed: Seed,
}

/// Solves 1 = Ê[((t/y + S)/(|z|² + (t+yS)(t+yS′)))^{α/2}] on the bank.
/// t = 0 uses the limit equation; at z = 0 it is replaced by t = 10⁻⁶.
pub fn rde_y(z: Complex64, t: f64, bank: &StableSampleBank) -> Result<RdeSolution> {
    bank.check()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("t must be nonnegative, got {t}")));
    }
    let r = z.norm_sqr();
    let t = if t == 0.0 && r == 0.0 { ORIGIN_T } else { t };
    let (y, residual) = solve_y(bank, r, t, None)?;
    Ok(RdeSolution { z, t, y, residual, bank_size: bank.len(), seed: bank.seed })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct HMoments {
    pub solution: RdeSolution,
    pub mean_h: f64,
    pub se_h: f64,
    pub mean_b: Complex64,
}

/// Bank averages of h = (t+yS)/(|z|²+(t+yS)(t+yS′)) and b = −z/(|z|²+(t+yS)(t+yS′)).
pub fn rde_h_moments(z: Complex64, t: f64, bank: &StableSampleBank) -> Result<HMoments> {
    let solution = rde_y(z, t, bank)?;
    let (r, t, y) = (z.norm_sqr(), solution.t, solution.y);
    let h = |s: f64, sp: f64| (t + y * s) / (r + (t + y * s) * (t + y * sp));
    let mean_h = bank.mean_of(h);
    let mean_h2 = bank.mean_of(|s, sp| h(s, sp).powi(2));
    let inv = bank.mean_of(|s, sp| 1.0 / (r + (t + y * s) * (t + y * sp)));
    let n = bank.len() as f64;
    let se_h = ((mean_h2 - mean_h * mean_h).max(0.0) / (n - 1.0)).sqrt();
    Ok(HMoments { solution, mean_h, se_h, mean_b: -z * inv })
}


/// Evaluates g_α at many radii on one bank, warm-starting every y_* solve
/// from the nearest point already solved.
pub struct GDensity<'a> {
    bank: &'a StableSampleBank,
    fd_step: Option<f64>,
    solved: RefCell<Vec<(f64, f64)>>,
}

impl<'a> GDensity<'a> {
    pub fn new(bank: &'a StableSampleBank, fd_step: Option<f64>) -> Result<Self> {
        bank.check()?;
        Ok(Self { bank, fd_step, solved: RefCell::new(Vec::new()) })
    }

    /// y_*(x) solving 1 = Ê[(S/(x + y²SS′))^{α/2}], x = |z|² ≥ 0.
    pub fn y_star(&self, x: f64) -> Result<f64> {
        let hint = self
            .solved
            .borrow()
            .iter()
            .min_by(|a, b| (a.0 - x).abs().total_cmp(&(b.0 - x).abs()))
            .map(|p| p.1);
        let (y, _) = solve_y(self.bank, x, 0.0, hint)?;
        self.solved.borrow_mut().push((x, y));
        Ok(y)
    }

    /// Unclipped formula value at |z| = r.
    pub fn raw(&self, r: f64) -> Result<f64> {
        let x = r * r;
        let h = self.fd_step.unwrap_or(1e-3 * (1.0 + x));
        let y0 = self.y_star(x)?;
        let yp = self.y_star(x + h)?;
        let dy = if x >= h { (yp - self.y_star(x - h)?) / (2.0 * h) } else { (yp - y0) / h };
        let y2 = y0 * y0;
        let m = self.bank.mean_of(|s, sp| {
            let p = s * sp;
            p / (x + y2 * p).powi(2)
        });
        Ok((y2 - 2.0 * x * y0 * dy) * m / PI)
    }

    pub fn at(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::InvalidParameter(format!("radius must be nonnegative, got {r}")));
        }
        let g = self.raw(r)?;
        if g < -NEG_TOL {
            return Err(Error::Numerical(format!("g_alpha({r}) = {g} is negative beyond tolerance")));
        }
        Ok(g.max(0.0))
    }

    /// R²·Ê[1/(R² + y_*²SS′)], the disc mass by the Stokes identity.
    pub fn disc_mass(&self, radius: f64) -> Result<f64> {
        let x = radius * radius;
        let y2 = self.y_star(x)?.powi(2);
        Ok(x * self.bank.mean_of(|s, sp| 1.0 / (x + y2 * s * sp)))
    }
}

/// y_*(|z|²) on the bank.
pub fn solve_y_star(x: f64, bank: &StableSampleBank) -> Result<f64> {
    GDensity::new(bank, None)?.y_star(x)
}

/// Density g_α of the limit spectral law at any z with |z| = r.
/// `fd_step` is the finite-difference step in r² (default 10⁻³(1 + r²)).
pub fn heavy_density_g(r: f64, bank: &StableSampleBank, fd_step: Option<f64>) -> Result<f64> {
    GDensity::new(bank, fd_step)?.at(r)
}

pub fn heavy_disc_mass(radius: f64, bank: &StableSampleBank) -> Result<f64> {
    GDensity::new(bank, None)?.disc_mass(radius)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GNormalization {
    pub radius: f64,
    pub integral: f64,
    pub tail: f64,
    pub total: f64,
    pub disc_mass: f64,
}

fn tail_shape(r: f64, alpha: f64) -> f64 {
    r.powf(2.0 * (alpha - 1.0)) * (-0.5 * alpha * r.powf(alpha)).exp()
}

/// Largest |z|² for which the limit y-equation is solvable on this bank.
fn solvable_limit(bank: &StableSampleBank) -> f64 {
    let a = bank.alpha;
    bank.mean_of(|s, _| pow_half_alpha(s, a)).powf(2.0 / a)
}

/// Cut-off radius: e^{-(α/2)R^α} = e^{-10}, capped inside the solvable range.
pub fn g_cutoff_radius(bank: &StableSampleBank) -> f64 {
    let a = bank.alpha;
    (20.0 / a).powf(1.0 / a).min((0.25 * solvable_limit(bank)).sqrt())
}

/// ∫ g_α(r)·2πr dr over [0, R] by adaptive quadrature, plus the tail beyond R
/// bounded by the shape r^{2(α−1)}e^{−(α/2)r^α} matched at R.
pub fn g_normalization(bank: &StableSampleBank) -> Result<GNormalization> {
    bank.check()?;
    let alpha = bank.alpha;
    let radius = g_cutoff_radius(bank);
    let eval = GDensity::new(bank, None)?;
    let failure: Cell<Option<Error>> = Cell::new(None);
    let integral = integrate(
        |r| match eval.at(r) {
            Ok(g) => g * 2.0 * PI * r,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        },
        0.0,
        radius,
        1e-3,
        1e-3,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let g_end = eval.at(radius)?;
    let base = tail_shape(radius, alpha);
    let tail = if base > 0.0 {
        let upper = radius + 40.0 / (alpha * radius.powf(alpha - 1.0));
        g_end / base * integrate(|r| tail_shape(r, alpha) * 2.0 * PI * r, radius, upper, 1e-12, 1e-8)
    } else {
        0.0
    };
    let disc_mass = eval.disc_mass(radius)?;
    Ok(GNormalization { radius, integral, tail, total: integral + tail, disc_mass })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TailShape {
    pub r0: f64,
    pub residual_slope: f64,
    pub main_slope: f64,
}

/// Slope in r of log g_α(r) + (α/2)r^α − 2(α−1)log r over [r₀, 2r₀], with the
/// average slope of the main term (α/2)r^α for comparison.
pub fn g_tail_shape(r0: f64, bank: &StableSampleBank, points: usize) -> Result<TailShape> {
    let alpha = bank.alpha;
    let points = points.max(3);
    let rs: Vec<f64> = (0..points).map(|k| r0 * (1.0 + k as f64 / (points - 1) as f64)).collect();
    let eval = GDensity::new(bank, None)?;
    let mut res = Vec::with_capacity(points);
    for &r in &rs {
        let g = eval.at(r)?;
        if g <= 0.0 {
            return Err(Error::Numerical(format!("g_alpha({r}) vanished on the bank")));
        }
        res.push(g.ln() + 0.5 * alpha * r.powf(alpha) - 2.0 * (alpha - 1.0) * r.ln());
    }
    let (_, residual_slope) = linear_fit(&rs, &res);
    let main_slope = 0.5 * alpha * ((2.0 * r0).powf(alpha) - r0.powf(alpha)) / r0;
    Ok(TailShape { r0, residual_slope, main_slope })
}

/// Population-dynamics settings for the complex-argument fixed point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PopulationConfig {
    pub pool: usize,
    /// Poisson points drawn explicitly; the rest enter through their mean.
    pub truncation: usize,
    pub burn_in: usize,
    /// Sweeps before measuring when warm-started from the previous point.
    pub warm_sweeps: usize,
    pub sweeps: usize,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        Self { pool: 10_000, truncation: 50, burn_in: 100, warm_sweeps: 6, sweeps: 12 }
    }
}

impl PopulationConfig {
    fn validate(&self) -> Result<()> {
        if self.pool < 2 || self.truncation == 0 || self.sweeps == 0 {
            return Err(Error::InvalidParameter("population needs pool ≥ 2, truncation ≥ 1, sweeps ≥ 1".into()));
        }
        Ok(())
    }
}

/// Pool of diagonal resolvent entries (R₁₁, R₂₂) at the root of the tree.
struct Population {
    alpha: f64,
    z: Complex64,
    truncation: usize,
    p11: Vec<Complex64>,
    p22: Vec<Complex64>,
    rng: ChaCha8Rng,
}

impl Population {
    fn new(alpha: f64, z: Complex64, cfg: &PopulationConfig, seed: Seed) -> Self {
        let i = Complex64::new(0.0, 1.0);
        Self { alpha, z, truncation: cfg.truncation, p11: vec![i; cfg.pool], p22: vec![i; cfg.pool], rng: seed.rng() }
    }

    /// Σ_k ξ_k Y_{J_k} over one Poisson process, the points beyond the
    /// truncation replaced by their mean contribution.
    fn poisson_sum(&mut self, pool: &[Complex64], pool_mean: Complex64) -> Complex64 {
        let p = -2.0 / self.alpha;
        let mut x = 0.0;
        let mut acc = Complex64::new(0.0, 0.0);
        let n = pool.len();
        for _ in 0..self.truncation {
            let e: f64 = Exp1.sample(&mut self.rng);
            x += e;
            let xi = if self.alpha == 1.0 { 1.0 / (x * x) } else { x.powf(p) };
            acc += xi * pool[self.rng.random_range(0..n)];
        }
        acc + pool_mean * x.powf(1.0 + p) / (-p - 1.0)
    }

    /// One synchronous sweep at η; returns the new pool mean of R₁₁. With
    /// `lazy`, each entry is replaced with probability ½ and kept otherwise:
    /// same fixed law, but the mean map a ↦ −1/(η + a) loses its near −1
    /// derivative in the bulk, where plain sweeps only creep at rate ~Im η.
    fn sweep(&mut self, eta: Complex64, lazy: bool) -> Complex64 {
        let n = self.p11.len();
        let old11 = std::mem::take(&mut self.p11);
        let old22 = std::mem::take(&mut self.p22);
        let m11 = crate::numerics::pairwise_sum_complex(&old11) / n as f64;
        let m22 = crate::numerics::pairwise_sum_complex(&old22) / n as f64;
        let r = self.z.norm_sqr();
        let mut new11 = Vec::with_capacity(n);
        let mut new22 = Vec::with_capacity(n);
        for i in 0..n {
            if lazy && self.rng.random::<bool>() {
                new11.push(old11[i]);
                new22.push(old22[i]);
                continue;
            }
            let s1 = self.poisson_sum(&old22, m22);
            if r == 0.0 {
                let a = -1.0 / (eta + s1);
                new11.push(a);
                new22.push(a);
            } else {
                let s2 = self.poisson_sum(&old11, m11);
                let (u, v) = (eta + s1, eta + s2);
                let det = u * v - r;
                new11.push(-v / det);
                new22.push(-u / det);
            }
        }
        self.p11 = new11;
        self.p22 = new22;
        crate::numerics::pairwise_sum_complex(&self.p11) / n as f64
    }

    fn measure(&mut self, eta: Complex64, burn: usize, sweeps: usize) -> (Complex64, f64) {
        for _ in 0..burn {
            self.sweep(eta, true);
        }
        let means: Vec<Complex64> = (0..sweeps).map(|_| self.sweep(eta, false)).collect();
        let im: Vec<f64> = means.iter().map(|m| m.im).collect();
        let se = if sweeps > 1 { std_error(&im) } else { 0.0 };
        (crate::numerics::pairwise_sum_complex(&means) / sweeps as f64, se)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PopulationEstimate {
    pub a: Complex64,
    pub se_im: f64,
}

/// Root entry a(q) = Γ(q)₁₁ = m_{ν̌_{α,z}}(η) by population dynamics.
pub fn rde_population_stieltjes(z: Complex64, eta: Complex64, alpha: f64, cfg: &PopulationConfig, seed: Seed) -> Result<PopulationEstimate> {
    check_alpha(alpha)?;
    cfg.validate()?;
    if !(eta.im > 0.0) {
        return Err(Error::InvalidParameter(format!("Im eta must be positive, got {eta}")));
    }
    let mut pop = Population::new(alpha, z, cfg, seed);
    let (a, se_im) = pop.measure(eta, cfg.burn_in, cfg.sweeps);
    Ok(PopulationEstimate { a, se_im })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tail index {alpha} outside (0,2)")))
    }
}

/// Density of ν_{α,z} on the grid `xs` (visited in order, warm-starting the
/// population): (2/π)·Im a(x + iε) extrapolated to ε = 0. One independent
/// population per ε, seeded by `seed.child(k)`.
pub fn nu_alpha_z_table(z: Complex64, xs: &[f64], alpha: f64, eps: &[f64], cfg: &PopulationConfig, seed: Seed) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    cfg.validate()?;
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidParameter("eps sequence must be nonempty and positive".into()));
    }
    if xs.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::InvalidParameter("x must be nonnegative".into()));
    }
    let per_eps: Vec<Vec<f64>> = eps
        .par_iter()
        .enumerate()
        .map(|(k, &e)| {
            let mut pop = Population::new(alpha, z, cfg, seed.child(k as u64));
            xs.iter()
                .enumerate()
                .map(|(j, &x)| {
                    let burn = if j == 0 { cfg.burn_in } else { cfg.warm_sweeps };
                    2.0 / PI * pop.measure(Complex64::new(x, e), burn, cfg.sweeps).0.im
                })
                .collect()
        })
        .collect();
    Ok((0..xs.len())
        .map(|j| {
            let v: Vec<f64> = per_eps.iter().map(|row| row[j]).collect();
            extrapolate_to_zero(eps, &v).max(0.0)
        })
        .collect())
}

pub fn nu_alpha_z_density(z: Complex64, x: f64, alpha: f64, eps: &[f64], cfg: &PopulationConfig, seed: Seed) -> Result<f64> {
    Ok(nu_alpha_z_table(z, &[x], alpha, eps, cfg, seed)?[0])
}

/// Tabulated density of ν_{α,z} with its CDF; beyond the grid the tail
/// follows ν([t, ∞)) ∝ t^{−α}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuAlphaTable {
    pub alpha: f64,
    pub xs: Vec<f64>,
    pub density: Vec<f64>,
    pub cdf: Vec<f64>,
}

impl NuAlphaTable {
    pub fn new(alpha: f64, xs: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if xs.len() != density.len() {
            return Err(Error::LengthMismatch { left: xs.len(), right: density.len() });
        }
        if xs.len() < 2 || xs[0] != 0.0 || xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("grid must start at 0 and increase".into()));
        }
        let mut cdf = vec![0.0; xs.len()];
        for k in 1..xs.len() {
            cdf[k] = cdf[k - 1] + 0.5 * (density[k] + density[k - 1]) * (xs[k] - xs[k - 1]);
        }
        Ok(Self { alpha, xs, density, cdf })
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().expect("nonempty")
    }

    /// Grid mass plus the tail allowance X_max^{−α}.
    pub fn total_mass(&self) -> f64 {
        self.cdf.last().expect("nonempty") + self.x_max().powf(-self.alpha)
    }

    pub fn cdf_at(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let xm = self.x_max();
        let fm = *self.cdf.last().expect("nonempty");
        if x >= xm {
            return 1.0 - (1.0 - fm) * (xm / x).powf(self.alpha);
        }
        let k = self.xs.partition_point(|&g| g <= x) - 1;
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let (d0, d1) = (self.density[k], self.density[k + 1]);
        let u = x - x0;
        let slope = (d1 - d0) / (x1 - x0);
        self.cdf[k] + d0 * u + 0.5 * slope * u * u
    }
}

/// Grid for ν_α tables: fine near the bulk, coarser in the tail.
pub fn nu_alpha_grid(x_max: f64) -> Vec<f64> {
    let mut xs = Vec::new();
    let mut x: f64 = 0.0;
    while x < x_max - 1e-12 {
        xs.push(x);
        x += if x < 2.0 - 1e-12 {
            0.05
        } else if x < 6.0 - 1e-12 {
            0.1
        } else {
            0.5
        };
        x = (x * 1e9).round() / 1e9;
    }
    xs.push(x_max);
    xs
}

/// Root value of the 2×2 resolvent recursion on a truncated PWIT: leaves get
/// −q⁻¹, internal vertices R = −(q + diag(Σ(1−ε_k)ξ_k c_k, Σ ε_k ξ_k a_k))⁻¹
/// with ξ_k = y_k^{−2/α} and (a_k, c_k) the diagonal of the child's R.
pub fn pwit_resolvent_root(tree: &PwitTree, q: &QPoint, alpha: f64) -> Result<QTransform> {
    check_alpha(alpha)?;
    if !(q.eta.im > 0.0) {
        return Err(Error::InvalidParameter(format!("Im eta must be positive, got {}", q.eta)));
    }
    let nv = tree.vertex_count();
    let internal = tree.internal_count();
    let leaf = q.neg_inverse();
    let mut diag = vec![(leaf.a, leaf.d); nv];
    let p = -2.0 / alpha;
    let r = q.z.norm_sqr();
    let mut root = leaf;
    for g in (0..internal).rev() {
        let (mut s1, mut s2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for k in tree.children(g) {
            let mark = tree.mark(k).expect("child has a mark");
            let xi = mark.y.powf(p);
            let (a_k, c_k) = diag[k];
            if mark.epsilon == 0 {
                s1 += xi * c_k;
            } else {
                s2 += xi * a_k;
            }
        }
        let (u, v) = (q.eta + s1, q.eta + s2);
        let det = u * v - r;
        let rv = QTransform { a: -v / det, b: q.z / det, c: q.z.conj() / det, d: -u / det };
        if !(rv.a.im > 0.0 && rv.d.im > 0.0) {
            return Err(Error::Numerical(format!("resolvent lost positivity at vertex {g}")));
        }
        diag[g] = (rv.a, rv.d);
        if g == 0 {
            root = rv;
        }
    }
    Ok(root)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PwitEstimate {
    pub mean_a: Complex64,
    pub se_im: f64,
    pub trees: usize,
}

/// Monte Carlo mean of the root a-entry over independent trees (tree k uses
/// `seed.child(k)`).
pub fn pwit_root_mean(depth: usize, branching: usize, alpha: f64, q: &QPoint, trees: usize, seed: Seed) -> Result<PwitEstimate> {
    if trees < 2 {
        return Err(Error::InvalidParameter("need at least two trees".into()));
    }
    let vals: Vec<Complex64> = (0..trees)
        .into_par_iter()
        .map(|k| {
            let tree = sample_pwit(depth, branching, alpha, Phase::DeterministicOne, seed.child(k as u64))?;
            Ok(pwit_resolvent_root(&tree, q, alpha)?.a)
        })
        .collect::<Result<_>>()?;
    let im: Vec<f64> = vals.iter().map(|v| v.im).collect();
    let re: Vec<f64> = vals.iter().map(|v| v.re).collect();
    Ok(PwitEstimate { mean_a: Complex64::new(mean(&re), mean(&im)), se_im: std_error(&im), trees })
}

/// Depth-first variant of the tree recursion without storing the tree: a vertex
/// at level ℓ keeps the `profile[ℓ]` largest weights of its sibling list, so
/// deep trees stay affordable with a tapering profile. Tree k uses `seed.child(k)`.
pub fn pwit_profile_mean(profile: &[usize], alpha: f64, q: &QPoint, trees: usize, seed: Seed) -> Result<PwitEstimate> {
    check_alpha(alpha)?;
    if trees < 2 {
        return Err(Error::InvalidParameter("need at least two trees".into()));
    }
    if profile.contains(&0) {
        return Err(Error::InvalidParameter("branching profile entries must be positive".into()));
    }
    let vals: Vec<Complex64> = (0..trees)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed.child(k as u64).rng();
            Ok(profile_vertex(profile, alpha, q, &mut rng)?.0)
        })
        .collect::<Result<_>>()?;
    let im: Vec<f64> = vals.iter().map(|v| v.im).collect();
    let re: Vec<f64> = vals.iter().map(|v| v.re).collect();
    Ok(PwitEstimate { mean_a: Complex64::new(mean(&re), mean(&im)), se_im: std_error(&im), trees })
}

fn profile_vertex(profile: &[usize], alpha: f64, q: &QPoint, rng: &mut ChaCha8Rng) -> Result<(Complex64, Complex64)> {
    let Some((&m, rest)) = profile.split_first() else {
        let leaf = q.neg_inverse();
        return Ok((leaf.a, leaf.d));
    };
    let p = -2.0 / alpha;
    let mut y = 0.0;
    let marks: Vec<(f64, bool)> = (0..m)
        .map(|_| {
            let e: f64 = Exp1.sample(rng);
            y += 0.5 * e;
            (y, rng.random::<bool>())
        })
        .collect();
    let (mut s1, mut s2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for &(yk, side) in &marks {
        let (a_k, c_k) = profile_vertex(rest, alpha, q, rng)?;
        let xi = yk.powf(p);
        if side {
            s2 += xi * a_k;
        } else {
            s1 += xi * c_k;
        }
    }
    let (u, v) = (q.eta + s1, q.eta + s2);
    let det = u * v - q.z.norm_sqr();
    let (a, d) = (-v / det, -u / det);
    if !(a.im > 0.0 && d.im > 0.0) {
        return Err(Error::Numerical("resolvent lost positivity".into()));
    }
    Ok((a, d))
}

/// Truncated sums Σ_{k≤K} ξ_k Y_k with Y_k ~ Exp(1); in law close to
/// Γ(1 + α/2)^{2/α}·S. Draw i uses `seed.child(i)`.
pub fn poisson_exp_sums(alpha: f64, truncation: usize, count: usize, seed: Seed) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if truncation == 0 || count == 0 {
        return Err(Error::InvalidParameter("truncation and count must be positive".into()));
    }
    Ok((0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.child(i as u64).rng();
            let w = poisson_weights_with(alpha, truncation, &mut rng);
            let terms: Vec<f64> = w
                .iter()
                .map(|&xi| {
                    let y: f64 = Exp1.sample(&mut rng);
                    xi * y
                })
                .collect();
            pairwise_sum(&terms)
        })
        .collect())
}

/// Hill estimator of the tail index from the top `fraction` of the samples.
pub fn tail_index_estimate(samples: &[f64], fraction: f64) -> Result<f64> {
    if samples.len() < 100 {
        return Err(Error::InsufficientSamples { need: 100, got: samples.len() });
    }
    if !(fraction > 0.0 && fraction <= 0.2) {
        return Err(Error::InvalidParameter(format!("fraction {fraction} outside (0, 0.2]")));
    }
    let mut v = samples.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    let k = ((fraction * v.len() as f64).floor() as usize).max(1);
    let threshold = v[k];
    if !(threshold > 0.0) {
        return Err(Error::InvalidParameter("top order statistics must be positive".into()));
    }
    let logs: Vec<f64> = v[..k].iter().map(|x| (x / threshold).ln()).collect();
    Ok(k as f64 / pairwise_sum(&logs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::sample_pwit;

    fn bank(n: usize, m: u64) -> StableSampleBank {
        StableSampleBank::generate(1.0, n, Seed::new(m, 0)).unwrap()
    }

    #[test]
    fn small_bank_rejected() {
        let b = bank(10, 1);
        assert!(matches!(rde_y(Complex64::new(0.5, 0.0), 1.0, &b), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn functional_decreasing_and_residual_small() {
        let b = bank(100_000, 2);
        let z = Complex64::new(0.7, 0.2);
        let ys = [0.01, 0.1, 1.0, 10.0];
        let f: Vec<f64> = ys.iter().map(|&y| y_functional(&b, z.norm_sqr(), 0.5, y)).collect();
        assert!(f.windows(2).all(|w| w[1] < w[0]));
        let sol = rde_y(z, 0.5, &b).unwrap();
        assert!(sol.residual < 1e-10, "{}", sol.residual);
        let sol0 = rde_y(z, 0.0, &b).unwrap();
        assert!(sol0.residual < 1e-10);
    }

    #[test]
    fn h_in_range_and_decays() {
        let b = bank(100_000, 3);
        for t in [0.1, 1.0, 3.0] {
            let m = rde_h_moments(Complex64::new(0.4, 0.0), t, &b).unwrap();
            assert!(m.mean_h > 0.0 && m.mean_h <= 1.0 / t);
        }
        let hs: Vec<f64> =
            [2.0, 10.0, 20.0].iter().map(|&r| rde_h_moments(Complex64::new(r, 0.0), 1.0, &b).unwrap().mean_h).collect();
        assert!(hs.windows(2).all(|w| w[1] < w[0]));
        assert!(hs[1] < 0.03 && hs[2] < 0.01, "{hs:?}");
    }

    #[test]
    fn pwit_depth_zero_is_neg_inverse() {
        let q = QPoint::imaginary(Complex64::new(0.3, 0.1), 1.0).unwrap();
        let tree = sample_pwit(0, 5, 1.0, Phase::DeterministicOne, Seed::new(1, 0)).unwrap();
        assert_eq!(pwit_resolvent_root(&tree, &q, 1.0).unwrap(), q.neg_inverse());
    }

    #[test]
    fn profile_empty_is_neg_inverse_and_deterministic() {
        let q = QPoint::imaginary(Complex64::new(0.3, 0.1), 1.0).unwrap();
        let e = pwit_profile_mean(&[], 1.0, &q, 4, Seed::new(1, 0)).unwrap();
        assert!((e.mean_a - q.neg_inverse().a).norm() < 1e-15 && e.se_im == 0.0);
        let a = pwit_profile_mean(&[5, 3], 1.0, &q, 20, Seed::new(2, 0)).unwrap();
        assert_eq!(a, pwit_profile_mean(&[5, 3], 1.0, &q, 20, Seed::new(2, 0)).unwrap());
        assert!(a.mean_a.im > 0.0);
        assert!(pwit_profile_mean(&[5, 0], 1.0, &q, 20, Seed::new(2, 0)).is_err());
    }

    #[test]
    fn hill_on_pareto_and_scale_free() {
        let mut rng = Seed::new(4, 0).rng();
        let x: Vec<f64> = (0..100_000).map(|_| 1.0 / (1.0 - rng.random::<f64>())).collect();
        let a = tail_index_estimate(&x, 0.05).unwrap();
        assert!((a - 1.0).abs() < 0.1, "{a}");
        let scaled: Vec<f64> = x.iter().map(|v| 4.0 * v).collect();
        assert_eq!(tail_index_estimate(&scaled, 0.05).unwrap(), a);
        let e: Vec<f64> = (0..100_000).map(|_| Exp1.sample(&mut rng)).collect();
        assert!(tail_index_estimate(&e, 0.05).unwrap() > 3.0);
        assert!(tail_index_estimate(&x[..50], 0.1).is_err());
        assert!(tail_index_estimate(&x, 0.3).is_err());
    }

    #[test]
    fn table_cdf_monotone() {
        let xs = nu_alpha_grid(20.0);
        let d: Vec<f64> = xs.iter().map(|x| 1.0 / (1.0 + x).powi(2)).collect();
        let t = NuAlphaTable::new(1.0, xs, d).unwrap();
        let mut prev = 0.0;
        for k in 0..400 {
            let c = t.cdf_at(k as f64 * 0.1);
            assert!(c >= prev - 1e-15);
            prev = c;
        }
    }
}
