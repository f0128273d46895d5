//! Verification suites at desk scale. Each suite returns one report per check;
//! a suite passes when every report does.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    concentration_experiment, quaternionic_concentration, row_distances, singular_cdf_distance, singularity_frequency,
    small_sv_count_experiment, smallest_sv_bounds_check, smallest_sv_tail_experiment, TestFunction,
};
use crate::error::{Error, Result};
use crate::heavy::{
    g_normalization, g_tail_shape, nu_alpha_grid, nu_alpha_z_table, poisson_exp_sums, pwit_profile_mean, rde_h_moments,
    rde_population_stieltjes, tail_index_estimate, NuAlphaTable, PopulationConfig, StableSampleBank,
};
use crate::laws::{
    circular_h_limit, ginibre_mean_density, gumbel_center, gumbel_standardize, kostlan_radius_cdf, nu_z_beta,
    nu_z_density, nu_z_fixed_point, quarter_circular_density, LawDescriptor,
};
use crate::matrix::ComplexMatrix;
use crate::numerics::{linear_fit, mean, median, std_error};
use crate::rng::{sample_iid_matrix, sample_kostlan_moduli, sample_positive_stable, EntryLaw, Seed};
use crate::spectral::{
    bipartize, conjugate_pairs_consistent, default_real_tol, eigenvalues, hermitian_eigenvalues, phase,
    real_eigenvalue_count, singular_values,
};
use crate::special::ks_critical_two_sample;
use crate::stats::{binomial_sigma, ks_distance, ks_two_sample, GofReport, Reference};
use crate::transforms::{
    b_field, ldp_rate, log_potential_det, log_potential_empirical, log_potential_hermitized,
    quaternionic_transform, recover_density_from_b, Axis, Lattice, QPoint,
};

/// Euler–Mascheroni constant, the mean of the standard Gumbel law.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Identities,
    QuarterCircular,
    Circular,
    Kostlan,
    Gumbel,
    NuZ,
    Quaternionic,
    Energy,
    Heavy,
    RealGinibre,
    Invertibility,
    Concentration,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::Identities,
        Suite::QuarterCircular,
        Suite::Circular,
        Suite::Kostlan,
        Suite::Gumbel,
        Suite::NuZ,
        Suite::Quaternionic,
        Suite::Energy,
        Suite::Heavy,
        Suite::RealGinibre,
        Suite::Invertibility,
        Suite::Concentration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::QuarterCircular => "quarter-circular",
            Suite::Circular => "circular",
            Suite::Kostlan => "kostlan",
            Suite::Gumbel => "gumbel",
            Suite::NuZ => "nu-z",
            Suite::Quaternionic => "quaternionic",
            Suite::Energy => "energy",
            Suite::Heavy => "heavy",
            Suite::RealGinibre => "real-ginibre",
            Suite::Invertibility => "invertibility",
            Suite::Concentration => "concentration",
        }
    }

    /// Matrix size used when the config leaves it open.
    pub fn default_n(self) -> usize {
        match self {
            Suite::Identities => 50,
            Suite::QuarterCircular | Suite::Circular | Suite::Energy => 1000,
            Suite::Kostlan => 100,
            Suite::Gumbel | Suite::NuZ => 500,
            Suite::Quaternionic => 300,
            Suite::Heavy => 2000,
            Suite::RealGinibre | Suite::Concentration => 200,
            Suite::Invertibility => 100,
        }
    }

    pub fn default_replicas(self) -> usize {
        match self {
            Suite::Kostlan | Suite::Invertibility => 200,
            Suite::Gumbel | Suite::Concentration => 500,
            Suite::RealGinibre => 100,
            _ => 1,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite '{s}'")))
    }
}

/// Overrides for a suite run; `None` means the suite's desk default.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub n: Option<usize>,
    pub replicas: Option<usize>,
    pub alpha: Option<f64>,
    pub seed: Seed,
}

impl SuiteConfig {
    pub fn new(seed: Seed) -> Self {
        Self { n: None, replicas: None, alpha: None, seed }
    }
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<GofReport>> {
    let n = cfg.n.unwrap_or(suite.default_n());
    let replicas = cfg.replicas.unwrap_or(suite.default_replicas());
    if n == 0 || replicas == 0 {
        return Err(Error::InvalidParameter("n and replicas must be positive".into()));
    }
    let seed = cfg.seed;
    match suite {
        Suite::Identities => identities(n, seed),
        Suite::QuarterCircular => quarter_circular(n, replicas, seed),
        Suite::Circular => circular(n, replicas, seed),
        Suite::Kostlan => kostlan(n, replicas, seed),
        Suite::Gumbel => gumbel(n, replicas, seed),
        Suite::NuZ => nu_z(n, seed),
        Suite::Quaternionic => quaternionic(n, seed),
        Suite::Energy => energy(n, seed),
        Suite::Heavy => heavy(n, cfg.alpha.unwrap_or(1.0), seed),
        Suite::RealGinibre => real_ginibre(n, replicas, seed),
        Suite::Invertibility => invertibility(n, replicas, seed),
        Suite::Concentration => concentration(n, replicas, seed),
    }
}

fn ginibre(n: usize, law: EntryLaw, seed: Seed) -> Result<ComplexMatrix> {
    Ok(sample_iid_matrix(n, law, seed)?.scaled(1.0 / (n as f64).sqrt()))
}

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn law_tag(law: EntryLaw) -> &'static str {
    match law {
        EntryLaw::ComplexGaussian => "complex-gaussian",
        EntryLaw::RealGaussian => "gaussian",
        EntryLaw::SymmetricBernoulli => "bernoulli",
        EntryLaw::HeavyTailed { .. } => "heavy",
    }
}

fn identities(n: usize, seed: Seed) -> Result<Vec<GofReport>> {
    let a = ginibre(n, EntryLaw::ComplexGaussian, seed.child(0))?;
    let b = ginibre(n, EntryLaw::ComplexGaussian, seed.child(1))?;
    let rep = |name: &str, stat: f64, crit: f64| GofReport::new(name, n, 1, stat, crit, seed);
    let mut out = Vec::new();
    let eig = eigenvalues(&a)?;
    let s = singular_values(&a)?;

    let zs = [
        Complex64::new(0.3, 0.1),
        Complex64::new(-0.5, 0.2),
        Complex64::new(0.0, -0.7),
        Complex64::new(1.2, -0.4),
        Complex64::new(-0.1, 1.5),
    ];
    let mut chain = 0.0f64;
    for &z in &zs {
        let u1 = log_potential_empirical(eig.values(), z)?;
        let u2 = log_potential_det(&a, z)?;
        let u3 = log_potential_hermitized(&a, z)?;
        chain = chain.max((u1 - u2).abs()).max((u1 - u3).abs()).max((u2 - u3).abs());
    }
    out.push(rep("uesd-chain", chain, 1e-8));

    let lm: Vec<f64> = eig.moduli().iter().map(|v| v.ln()).collect();
    let ls: Vec<f64> = s.iter().map(|v| v.ln()).collect();
    let (mut pl, mut ps, mut weyl) = (0.0, 0.0, f64::NEG_INFINITY);
    for k in 0..n {
        pl += lm[k];
        ps += ls[k];
        weyl = weyl.max(pl - ps);
    }
    out.push(rep("weyl-products", weyl, 1e-10));
    out.push(rep("weyl-determinant", (pl - ps).exp_m1().abs(), 1e-10));
    let (mut sl, mut ss, mut rev) = (0.0, 0.0, f64::NEG_INFINITY);
    for k in (0..n).rev() {
        sl += lm[k];
        ss += ls[k];
        rev = rev.max(ss - sl);
    }
    out.push(rep("weyl-reversed", rev, 1e-10));

    let s2: f64 = s.iter().map(|v| v * v).sum();
    let l2: f64 = eig.values().iter().map(|v| v.norm_sqr()).sum();
    let fro = a.frobenius_norm_sq();
    out.push(rep("weyl-second-moment", (l2 - s2) / s2, 1e-10));
    out.push(rep("trace-norm", ((s2 - fro) / fro).abs(), 1e-12));

    let diff = ComplexMatrix::from_faer(a.as_faer() - b.as_faer());
    let sb = singular_values(&b)?;
    let sd = singular_values(&diff)?;
    let hw: f64 = s.iter().zip(sb.iter()).map(|(x, y)| (x - y).powi(2)).sum();
    let dfro = diff.frobenius_norm_sq();
    out.push(rep("hoffman-wielandt", (hw - dfro) / dfro, 1e-10));
    let lip = max_abs(s.iter().zip(sb.iter()).map(|(x, y)| x - y));
    out.push(rep("singular-lipschitz", (lip - sd.largest()) / sd.largest(), 1e-10));
    let prod = singular_values(&ComplexMatrix::from_faer(a.as_faer() * b.as_faer()))?.largest();
    out.push(rep("norm-submultiplicative", prod / (s.largest() * sb.largest()) - 1.0, 1e-12));
    let sum = singular_values(&ComplexMatrix::from_faer(a.as_faer() + b.as_faer()))?.largest();
    out.push(rep("norm-subadditive", sum / (s.largest() + sb.largest()) - 1.0, 1e-12));

    let d = row_distances(&a)?;
    let inv_s: f64 = s.iter().map(|v| v.powi(-2)).sum();
    let inv_d: f64 = d.iter().map(|v| v.powi(-2)).sum();
    out.push(rep("row-distance-trace", ((inv_s - inv_d) / inv_s).abs(), 1e-8));
    let sw = smallest_sv_bounds_check(&a)?;
    out.push(rep("row-distance-sandwich", (sw.lower - sw.s_min).max(sw.s_min - sw.upper), 1e-10));

    let h = hermitian_eigenvalues(&bipartize(&a))?;
    let top = max_abs((0..n).map(|k| h[2 * n - 1 - k] - s.values()[k]));
    let bottom = max_abs((0..n).map(|k| h[k] + s.values()[k]));
    out.push(rep("bipartize-spectrum", top.max(bottom) / s.largest(), 1e-10));
    let lin = bipartize(&ComplexMatrix::from_faer(a.as_faer() + b.as_faer()));
    let (ha, hb) = (bipartize(&a), bipartize(&b));
    let mut gap = 0.0f64;
    for i in 0..2 * n {
        for j in 0..2 * n {
            gap = gap.max((lin.get(i, j) - (ha.get(i, j) + hb.get(i, j))).norm());
        }
    }
    out.push(rep("bipartize-linear", gap, 0.0));
    Ok(out)
}

const UNIVERSALITY_LAWS: [EntryLaw; 2] = [EntryLaw::RealGaussian, EntryLaw::SymmetricBernoulli];

fn quarter_circular(n: usize, replicas: usize, seed: Seed) -> Result<Vec<GofReport>> {
    let mut out = Vec::new();
    for (l, law) in UNIVERSALITY_LAWS.into_iter().enumerate() {
        let mut pooled = Vec::with_capacity(n * replicas);
        for r in 0..replicas {
            let x = ginibre(n, law, seed.child((l * replicas + r) as u64))?;
            pooled.extend_from_slice(singular_values(&x)?.values());
        }
        let d = ks_distance(&pooled, Reference::Law(LawDescriptor::QuarterCircular))?;
        out.push(GofReport::new(format!("quarter-circular-ks-{}", law_tag(law)), n, replicas, d, 0.05, seed));
    }
    Ok(out)
}

fn circular(n: usize, replicas: usize, seed: Seed) -> Result<Vec<GofReport>> {
    let mut out = Vec::new();
    for (l, law) in UNIVERSALITY_LAWS.into_iter().enumerate() {
        let mut moduli = Vec::with_capacity(n * replicas);
        let mut phases = Vec::with_capacity(n * replicas);
        for r in 0..replicas {
            let x = ginibre(n, law, seed.child((l * replicas + r) as u64))?;
            let e = eigenvalues(&x)?;
            moduli.extend(e.values().iter().map(|v| v.norm()));
            phases.extend(e.values().iter().map(|&v| phase(v)));
        }
        let dm = ks_distance(&moduli, Reference::Law(LawDescriptor::CircularModulus))?;
        let dp = ks_distance(&phases, Reference::Law(LawDescriptor::UniformInterval { a: 0.0, b: 2.0 * PI }))?;
        out.push(GofReport::new(format!("circular-moduli-ks-{}", law_tag(law)), n, replicas, dm, 0.05, seed));
        out.push(GofReport::new(format!("circular-phase-ks-{}", law_tag(law)), n, replicas, dp, 0.05, seed));
    }
    Ok(out)
}

const RADIUS_REPLICAS: usize = 10_000;
const DENSITY_N: usize = 200;

fn kostlan(n: usize, replicas: usize, seed: Seed) -> Result<Vec<GofReport>> {
    let sq = (n as f64).sqrt();
    let spectra: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| Ok(eigenvalues(&ginibre(n, EntryLaw::ComplexGaussian, seed.child(r as u64))?)?.moduli()))
        .collect::<Result<_>>()?;
    let eig: Vec<f64> = spectra.concat();
    let mut gamma = Vec::with_capacity(n * replicas);
    for r in 0..replicas {
        gamma.extend(sample_kostlan_moduli(n, seed.child((replicas + r) as u64))?.iter().map(|v| v / sq));
    }
    let d = ks_two_sample(&eig, &gamma)?;
    let mut out = vec![GofReport::new(
        "kostlan-moduli-two-sample-ks",
        n,
        replicas,
        d,
        ks_critical_two_sample(eig.len(), gamma.len(), 0.01),
        seed,
    )];

    let radii: Vec<f64> = (0..RADIUS_REPLICAS)
        .into_par_iter()
        .map(|r| Ok(sample_kostlan_moduli(n, seed.child((2 * replicas + r) as u64))?[0] / sq))
        .collect::<Result<_>>()?;
    for r in [0.9, 1.0, 1.1] {
        let f = kostlan_radius_cdf(n, r);
        let emp = radii.iter().filter(|&&v| v <= r).count() as f64 / RADIUS_REPLICAS as f64;
        let crit = 3.0 * binomial_sigma(f, RADIUS_REPLICAS);
        out.push(GofReport::new(format!("kostlan-radius-cdf-r{r}"), n, RADIUS_REPLICAS, (emp - f).abs(), crit, seed));
    }

    let m = DENSITY_N as f64;
    let at = |r: f64| m * ginibre_mean_density(DENSITY_N, Complex64::new(m.sqrt() * r, 0.0));
    out.push(GofReport::new("ginibre-mean-density-inside", DENSITY_N, 1, (at(0.5) - 1.0 / PI).abs(), 0.01, seed));
    out.push(GofReport::new("ginibre-mean-density-outside", DENSITY_N, 1, at(1.5).abs(), 0.01, seed));
    Ok(out)
}

fn gumbel(n: usize, replicas: usize, seed: Seed) -> Result<Vec<GofReport>> {
    let radii: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| Ok(eigenvalues(&ginibre(n, EntryLaw::ComplexGaussian, seed.child(r as u64))?)?.values()[0].norm()))
        .collect::<Result<_>>()?;
    let center = gumbel_center(n)?;
    let std: Vec<f64> = radii.iter().map(|&r| gumbel_standardize(n, r)).collect::<Result<_>>()?;
    Ok(vec![
        GofReport::new("spectral-radius-mean", n, replicas, (mean(&radii) - center).abs(), 0.03, seed),
        GofReport::new("gumbel-standardized-mean", n, replicas, (mean(&std) - EULER_GAMMA).abs(), 0.25, seed),
    ])
}

/// ε schedule for the finite-variance density reconstruction.
pub const NU_Z_EPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

fn nu_z(n: usize, seed: Seed) -> Result<Vec<GofReport>> {
    let grid = Axis::from_bounds(0.1, 1.9, 0.05)?.points();
    let mut gap = 0.0f64;
    for &x in &grid {
        gap = gap.max((nu_z_density(Complex64::new(0.0, 0.0), x, &NU_Z_EPS)? - quarter_circular_density(x)).abs());
    }
    let mut out = vec![GofReport::new("nu-zero-quarter-circular-sup-gap", grid.len(), 1, gap, 1e-3, seed)];
    let x = ginibre(n, EntryLaw::ComplexGaussian, seed.child(0))?;
    let points = [
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)),
        (Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5)),
        (Complex64::new(0.3, 0.4), Complex64::new(0.5, 0.5)),
        (Complex64::new(1.2, -0.3), Complex64::new(0.2, 0.4)),
        (Complex64::new(-0.8, 0.6), Complex64::new(1.0, 0.3)),
    ];
    for (k, (z, eta)) in points.into_iter().enumerate() {
        let emp = quaternionic_transform(&x, &QPoint::new(z, eta)?)?.a;
        let sol = nu_z_fixed_point(z, eta)?;
        out.push(GofReport::new(format!("nu-z-resolvent-point{k}"), n, 1, (emp - sol).norm(), 0.02, seed));
    }
    Ok(out)
}

fn quaternionic(n: usize, seed: Seed) -> Result<Vec<GofReport>> {
    let mut out = Vec::new();
    let t = 1e-4;
    for r in [0.0, 0.5, 0.9] {
        let z = Complex64::new(r, 0.0);
        let h = nu_z_fixed_point(z, Complex64::new(0.0, t))?.im;
        out.push(GofReport::new(format!("h-limit-r{r}"), 1, 1, (h - circular_h_limit(z)).abs(), 1e-3, seed));
        let beta = nu_z_beta(z, Complex64::new(0.0, t))?;
        out.push(GofReport::new(format!("beta-limit-r{r}"), 1, 1, (beta + z).norm(), 1e-3, seed));
    }
    let x = ginibre(n, EntryLaw::ComplexGaussian, seed.child(0))?;
    let axis = Axis::from_bounds(-1.5, 1.5, 0.1)?;
    let lattice = Lattice { re: axis, im: axis };
    let grid = recover_density_from_b(&b_field(&x, &lattice, 0.05)?, &lattice)?;
    let (mut inside, mut outside) = (0.0f64, 0.0f64);
    for (k, &rho) in grid.density.iter().enumerate() {
        let r = lattice.point(k).norm();
        if r <= 0.8 {
            inside = inside.max((rho - 1.0 / PI).abs());
        } else if r >= 1.2 {
            outside = outside.max(rho.abs());
        }
    }
    out.push(GofReport::new("recovered-density-inside", n, 1, inside, 0.1, seed));
    out.push(GofReport::new("recovered-density-outside", n, 1, outside, 0.1, seed));
    Ok(out)
}

fn energy(n: usize, seed: Seed) -> Result<Vec<GofReport>> {
    let e = eigenvalues(&ginibre(n, EntryLaw::ComplexGaussian, seed.child(0))?)?;
    Ok(vec![GofReport::new("log-energy-rate", n, 1, ldp_rate(e.values())?.abs(), 0.02, seed)])
}

/// Heavy-tail desk parameters.
pub const HEAVY_BANK: usize = 1_000_000;
pub const MAGIC_SAMPLES: usize = 10_000;
pub const MAGIC_TRUNCATION: usize = 10_000;
/// Children kept per vertex at each level of the truncated tree (depth 6).
pub const PWIT_PROFILE: [usize; 6] = [20, 10, 6, 4, 3, 3];
pub const PWIT_TREES: usize = 2000;
pub const NU_ALPHA_EPS: [f64; 3] = [0.04, 0.02, 0.01];
pub const NU_ALPHA_XMAX: f64 = 20.0;
pub const TAIL_R0: f64 = 4.0;
const TIGHTNESS_N: usize = 1000;
const TIGHTNESS_REPLICAS: usize = 10;

fn heavy(n: usize, alpha: f64, seed: Seed) -> Result<Vec<GofReport>> {
    let mut out = Vec::new();

    let sums = poisson_exp_sums(alpha, MAGIC_TRUNCATION, MAGIC_SAMPLES, seed.child(0))?;
    let factor = statrs::function::gamma::gamma(1.0 + alpha / 2.0).powf(2.0 / alpha);
    let s: Vec<f64> = sample_positive_stable(alpha, MAGIC_SAMPLES, seed.child(1))?.iter().map(|v| factor * v).collect();
    let crit = ks_critical_two_sample(MAGIC_SAMPLES, MAGIC_SAMPLES, 0.01);
    out.push(GofReport::new("poisson-stable-sum-ks", MAGIC_SAMPLES, 1, ks_two_sample(&sums, &s)?, crit, seed));

    let bank = StableSampleBank::generate(alpha, HEAVY_BANK, seed.child(2))?;
    let g1 = statrs::function::gamma::gamma(1.0 - alpha / 2.0);
    for x in [1.0f64, 4.0] {
        let v: Vec<f64> = bank.s.iter().map(|s| (-x * s).exp()).collect();
        let stat = (mean(&v) - (-g1 * x.powf(alpha / 2.0)).exp()).abs();
        out.push(GofReport::new(format!("stable-laplace-x{x}"), HEAVY_BANK, 1, stat, 3.0 * std_error(&v), seed));
    }

    let origin = Complex64::new(0.0, 0.0);
    let q = QPoint::imaginary(origin, 1.0)?;
    let pwit = pwit_profile_mean(&PWIT_PROFILE, alpha, &q, PWIT_TREES, seed.child(3))?;
    let pop = rde_population_stieltjes(origin, Complex64::new(0.0, 1.0), alpha, &PopulationConfig::default(), seed.child(4))?;
    let z = (pwit.mean_a.im - pop.a.im).abs() / pwit.se_im.hypot(pop.se_im);
    out.push(GofReport::new("pwit-vs-population", PWIT_TREES, 1, z, 3.0, seed));
    let hm = rde_h_moments(origin, 1.0, &bank)?;
    let z = (hm.mean_h - pop.a.im).abs() / hm.se_h.hypot(pop.se_im);
    out.push(GofReport::new("bank-vs-population", HEAVY_BANK, 1, z, 3.0, seed));

    let xs = nu_alpha_grid(NU_ALPHA_XMAX);
    let density = nu_alpha_z_table(origin, &xs, alpha, &NU_ALPHA_EPS, &PopulationConfig::default(), seed.child(5))?;
    let table = NuAlphaTable::new(alpha, xs, density)?;
    out.push(GofReport::new("nu-alpha-mass", table.xs.len(), 1, (table.total_mass() - 0.99).abs(), 0.02, seed));
    let ts: Vec<f64> = (0..=14).map(|k| 3.0 + 0.5 * k as f64).collect();
    let lt: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let lf: Vec<f64> = ts.iter().map(|&t| (1.0 - table.cdf_at(t)).ln()).collect();
    let slope = linear_fit(&lt, &lf).1;
    out.push(GofReport::new("nu-alpha-tail-slope", ts.len(), 1, (slope + alpha).abs(), 0.15, seed));

    let law = EntryLaw::heavy(alpha);
    let x = sample_iid_matrix(n, law, seed.child(6))?.scaled((n as f64).powf(-1.0 / alpha));
    let sv = singular_values(&x)?;
    let cdf = |v: f64| table.cdf_at(v);
    out.push(GofReport::new("nu-alpha-empirical-ks", n, 1, ks_distance(sv.values(), Reference::Cdf(&cdf))?, 0.06, seed));
    let hill = tail_index_estimate(sv.values(), 0.1)?;
    out.push(GofReport::new("singular-hill-index", n, 1, (hill - alpha).abs(), 0.2, seed));

    let norm = g_normalization(&bank)?;
    out.push(GofReport::new("g-alpha-normalization", HEAVY_BANK, 1, (norm.total - 1.0).abs(), 0.02, seed));
    let shape = g_tail_shape(TAIL_R0, &bank, 9)?;
    out.push(GofReport::new("g-alpha-tail-shape", HEAVY_BANK, 1, shape.residual_slope.abs(), 0.1 * shape.main_slope, seed));

    let p = alpha / 4.0;
    let moments: Vec<f64> = (0..TIGHTNESS_REPLICAS)
        .map(|r| {
            let x = sample_iid_matrix(TIGHTNESS_N, law, seed.child(7 + r as u64))?;
            let s = singular_values(&x.scaled((TIGHTNESS_N as f64).powf(-1.0 / alpha)))?;
            Ok(mean(&s.iter().map(|v| v.powf(p)).collect::<Vec<_>>()))
        })
        .collect::<Result<_>>()?;
    let ratio = moments.iter().copied().fold(0.0, f64::max) / median(&moments);
    out.push(GofReport::new("schatten-tightness", TIGHTNESS_N, TIGHTNESS_REPLICAS, ratio, 2.0, seed));
    Ok(out)
}

fn real_ginibre(n: usize, replicas: usize, seed: Seed) -> Result<Vec<GofReport>> {
    let per: Vec<(usize, Vec<f64>, bool)> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let x = ginibre(n, EntryLaw::RealGaussian, seed.child(r as u64))?;
            let tol = default_real_tol(&x)?;
            let e = eigenvalues(&x)?;
            let reals: Vec<f64> = e.values().iter().filter(|v| v.im.abs() <= tol).map(|v| v.re).collect();
            Ok((real_eigenvalue_count(&e, tol), reals, conjugate_pairs_consistent(&e, tol)))
        })
        .collect::<Result<_>>()?;
    let counts: Vec<f64> = per.iter().map(|p| p.0 as f64).collect();
    let ratio = mean(&counts) / (2.0 * n as f64 / PI).sqrt();
    let pooled: Vec<f64> = per.iter().flat_map(|p| p.1.iter().copied()).collect();
    let broken = per.iter().filter(|p| !p.2).count() as f64;
    let d = ks_distance(&pooled, Reference::Law(LawDescriptor::UniformInterval { a: -1.0, b: 1.0 }))?;
    Ok(vec![
        GofReport::new("real-eigenvalue-count-ratio", n, replicas, (ratio - 1.0).abs(), 0.15, seed),
        GofReport::new("real-eigenvalues-uniform-ks", n, replicas, d, 0.08, seed),
        GofReport::new("conjugate-pair-symmetry", n, replicas, broken, 0.0, seed),
    ])
}

/// t-grid for the smallest singular value tail curve.
pub const TAIL_T_GRID: [f64; 7] = [0.0, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0];

fn invertibility(n: usize, replicas: usize, seed: Seed) -> Result<Vec<GofReport>> {
    let mut out = Vec::new();
    let sizes = [n, 2 * n, 4 * n];
    let mut c_hats = Vec::new();
    for (k, &m) in sizes.iter().enumerate() {
        let curve = smallest_sv_tail_experiment(m, EntryLaw::RealGaussian, 0.0, replicas, &TAIL_T_GRID, seed.child(k as u64))?;
        let drops = curve.probability.windows(2).filter(|w| w[1] < w[0]).count() as f64;
        out.push(GofReport::new(format!("tail-curve-monotone-n{m}"), m, replicas, drops, 0.0, seed));
        out.push(GofReport::new(format!("tail-curve-origin-n{m}"), m, replicas, curve.probability[0], 0.0, seed));
        let excess = curve
            .t
            .iter()
            .zip(&curve.probability)
            .map(|(t, p)| p - curve.c_hat * (t + 1.0 / (m as f64).sqrt()))
            .fold(f64::NEG_INFINITY, f64::max);
        out.push(GofReport::new(format!("tail-curve-envelope-n{m}"), m, replicas, excess, 1e-12, seed));
        c_hats.push(curve.c_hat);
    }
    let hi = c_hats.iter().copied().fold(0.0, f64::max);
    let lo = c_hats.iter().copied().fold(f64::INFINITY, f64::min);
    out.push(GofReport::new("tail-envelope-stability", n, replicas, hi / lo, 2.0, seed));

    let freq = singularity_frequency(100, EntryLaw::SymmetricBernoulli, 1000, seed.child(10))?;
    out.push(GofReport::new("bernoulli-singularity-frequency", 100, 1000, freq, 0.01, seed));

    let reps = small_sv_count_experiment(2 * n, EntryLaw::RealGaussian, Complex64::new(0.0, 0.0), 20, seed.child(11))?;
    let bad = reps.iter().filter(|r| !(r.c_hat > 0.0)).count() as f64;
    out.push(GofReport::new("small-sv-linear-profile", 2 * n, 20, bad, 0.0, seed));
    let reps = small_sv_count_experiment(2 * n, EntryLaw::RealGaussian, Complex64::new(0.5, 0.0), 20, seed.child(12))?;
    let dev = max_abs(reps.iter().map(|r| r.log_slope - 1.0));
    out.push(GofReport::new("small-sv-log-slope-shifted", 2 * n, 20, dev, 0.2, seed));

    let m = 10;
    let d = singular_cdf_distance(&ComplexMatrix::shift(m), &ComplexMatrix::cyclic_shift(m, 0.5))?;
    out.push(GofReport::new("rank-one-interlacing", m, 1, d, 1.0 / m as f64, seed));
    Ok(out)
}

fn concentration(n: usize, replicas: usize, seed: Seed) -> Result<Vec<GofReport>> {
    let law = EntryLaw::RealGaussian;
    let fs = [TestFunction::Indicator { s: 1.0 }, TestFunction::Ramp { s: 0.8, width: 0.4 }];
    let mut out = concentration_experiment(n, law, &fs, replicas, &[0.05, 0.1], seed.child(0))?;

    let small = (replicas / 2).max(1);
    let t = 0.005;
    let lo = concentration_experiment(n / 2, law, &fs[..1], small, &[t], seed.child(1))?;
    let hi = concentration_experiment(2 * n, law, &fs[..1], small, &[t], seed.child(2))?;
    let (p_lo, p_hi) = (lo[0].statistic, hi[0].statistic);
    let sigma = binomial_sigma(0.5 * (p_lo + p_hi), small) * 2f64.sqrt();
    out.push(GofReport::new("concentration-monotone-in-n", 2 * n, small, p_hi - p_lo, 3.0 * sigma, seed));

    let q = QPoint::imaginary(Complex64::new(0.5, 0.0), 1.0)?;
    out.extend(quaternionic_concentration(n, law, &q, replicas.min(200), &[0.05, 0.1, 0.2], seed.child(3))?);
    Ok(out)
}
