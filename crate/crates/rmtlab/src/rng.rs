//! Seeded sampling of entry laws, matrix ensembles, Kostlan layers, one-sided
//! stable variables, Poisson weights and truncated PWITs.
//!
//! Every sampler is a pure function of its parameters and a [`Seed`]. Matrix
//! entries are addressable: row `i` reads ChaCha stream `i` and entry `(i, j)`
//! always consumes words `[16 j, 16 j + 16)` of it, so minors are stable in `n`
//! and results do not depend on how rows are scheduled across threads.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const CHILD_TWEAK: u64 = 0xD1B5_4A32_D192_ED03;
const WORDS_PER_ENTRY: usize = 4;

/// One step of SplitMix64; advances `state` and returns the mixed output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master: u64,
    #[serde(rename = "stream-index")]
    pub stream: u64,
}

impl Seed {
    pub const fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }

    fn origin(&self) -> u64 {
        self.master.wrapping_add(self.stream.wrapping_mul(GOLDEN))
    }

    /// 256-bit key obtained from four SplitMix64 outputs.
    pub fn key(&self) -> [u8; 32] {
        let mut state = self.origin();
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        key
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key())
    }

    /// Independent seed for sub-task `index` (replica, bank half, ...).
    pub fn child(&self, index: u64) -> Seed {
        let mut state = self.origin() ^ CHILD_TWEAK;
        Seed::new(splitmix64(&mut state), index)
    }
}

/// Uniform on (0, 1], never zero.
#[inline]
pub(crate) fn unit_open(word: u64) -> f64 {
    ((word >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    #[default]
    DeterministicOne,
    UniformCircle,
    Rademacher,
}

impl Phase {
    #[inline]
    fn draw(self, word: u64) -> Complex64 {
        match self {
            Phase::DeterministicOne => Complex64::new(1.0, 0.0),
            Phase::UniformCircle => Complex64::from_polar(1.0, 2.0 * PI * unit_open(word)),
            Phase::Rademacher => {
                if word >> 63 == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(-1.0, 0.0)
                }
            }
        }
    }

    pub fn is_real(self) -> bool {
        !matches!(self, Phase::UniformCircle)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EntryLaw {
    ComplexGaussian,
    RealGaussian,
    SymmetricBernoulli,
    HeavyTailed { alpha: f64, phase: Phase },
}

impl EntryLaw {
    pub fn heavy(alpha: f64) -> Self {
        EntryLaw::HeavyTailed { alpha, phase: Phase::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if let EntryLaw::HeavyTailed { alpha, .. } = *self {
            if !(alpha > 0.0 && alpha < 2.0) {
                return Err(Error::InvalidParameter(format!("tail index {alpha} outside (0,2)")));
            }
        }
        Ok(())
    }

    /// Whether samples are real (imaginary part exactly zero).
    pub fn is_real(&self) -> bool {
        match self {
            EntryLaw::ComplexGaussian => false,
            EntryLaw::RealGaussian | EntryLaw::SymmetricBernoulli => true,
            EntryLaw::HeavyTailed { phase, .. } => phase.is_real(),
        }
    }

    /// Maps a fixed budget of raw words to one entry.
    #[inline]
    pub fn from_words(&self, w: [u64; WORDS_PER_ENTRY]) -> Complex64 {
        match *self {
            EntryLaw::ComplexGaussian => {
                // |Z|^2 ~ Exp(1) with uniform phase: real and imaginary parts N(0, 1/2)
                let r = (-unit_open(w[0]).ln()).sqrt();
                Complex64::from_polar(r, 2.0 * PI * unit_open(w[1]))
            }
            EntryLaw::RealGaussian => {
                let r = (-2.0 * unit_open(w[0]).ln()).sqrt();
                Complex64::new(r * (2.0 * PI * unit_open(w[1])).cos(), 0.0)
            }
            EntryLaw::SymmetricBernoulli => {
                Complex64::new(if w[0] >> 63 == 0 { 1.0 } else { -1.0 }, 0.0)
            }
            EntryLaw::HeavyTailed { alpha, phase } => {
                let u = unit_open(w[0]);
                let modulus = if alpha == 1.0 { 1.0 / u } else { u.powf(-1.0 / alpha) };
                phase.draw(w[1]) * modulus
            }
        }
    }

    /// `count` i.i.d. draws from a sequential stream.
    pub fn sample(&self, count: usize, seed: Seed) -> Result<Vec<Complex64>> {
        self.validate()?;
        let mut rng = seed.rng();
        Ok((0..count)
            .map(|_| {
                let mut w = [0u64; WORDS_PER_ENTRY];
                w.iter_mut().for_each(|x| *x = rng.next_u64());
                self.from_words(w)
            })
            .collect())
    }
}

fn matrix_row(law: &EntryLaw, key: [u8; 32], row: usize, cols: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(row as u64);
    rng.set_word_pos(0);
    (0..cols)
        .map(|_| {
            let mut w = [0u64; WORDS_PER_ENTRY];
            w.iter_mut().for_each(|x| *x = rng.next_u64());
            law.from_words(w)
        })
        .collect()
}

/// n×n matrix with i.i.d. entries; entry (i, j) depends only on (seed, i, j).
pub fn sample_iid_matrix(n: usize, law: EntryLaw, seed: Seed) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    law.validate()?;
    let key = seed.key();
    let rows: Vec<Vec<Complex64>> =
        (0..n).into_par_iter().map(|i| matrix_row(&law, key, i, n)).collect();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Descending reordering of independent Z_k with Z_k^2 ~ Gamma(k, 1).
pub fn sample_kostlan_moduli(n: usize, seed: Seed) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    let mut rng = seed.rng();
    let mut z: Vec<f64> = (1..=n)
        .map(|k| {
            let g = Gamma::new(k as f64, 1.0).expect("valid gamma shape");
            g.sample(&mut rng).sqrt()
        })
        .collect();
    z.sort_by(|a, b| b.total_cmp(a));
    Ok(z)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tail index {alpha} outside (0,2)")))
    }
}

/// Scale Γ(1 − α/2)^{2/α} turning the standard positive (α/2)-stable law
/// (Laplace transform e^{-x^{α/2}}) into the one with e^{-Γ(1-α/2) x^{α/2}}.
pub fn stable_scale(alpha: f64) -> f64 {
    statrs::function::gamma::gamma(1.0 - alpha / 2.0).powf(2.0 / alpha)
}

/// Kanter's representation of the standard positive stable law of index `beta`.
#[inline]
fn kanter(beta: f64, u: f64, w: f64) -> f64 {
    let a = (beta * u).sin() / u.sin().powf(1.0 / beta);
    let b = ((1.0 - beta) * u).sin() / w;
    a * b.powf((1.0 - beta) / beta)
}

/// i.i.d. draws of S > 0 with E e^{-xS} = exp(−Γ(1−α/2) x^{α/2}).
pub fn sample_positive_stable(alpha: f64, count: usize, seed: Seed) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    let beta = alpha / 2.0;
    let scale = stable_scale(alpha);
    let mut rng = seed.rng();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = PI * unit_open(rng.next_u64());
        let w: f64 = Exp1.sample(&mut rng);
        if u >= PI || w <= 0.0 {
            continue;
        }
        let s = scale * kanter(beta, u, w);
        if s > 0.0 && s.is_finite() {
            out.push(s);
        }
    }
    Ok(out)
}

/// Largest K points of the Poisson process with intensity (α/2) x^{-α/2-1} dx,
/// in decreasing order: ξ_k = x_k^{-2/α} with x_k partial sums of Exp(1).
pub fn sample_poisson_weights(alpha: f64, truncation: usize, seed: Seed) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let mut rng = seed.rng();
    Ok(poisson_weights_with(alpha, truncation, &mut rng))
}

pub(crate) fn poisson_weights_with<R: Rng + ?Sized>(alpha: f64, k: usize, rng: &mut R) -> Vec<f64> {
    let p = -2.0 / alpha;
    let mut x = 0.0;
    (0..k)
        .map(|_| {
            let e: f64 = Exp1.sample(rng);
            x += e;
            if alpha == 1.0 { 1.0 / (x * x) } else { x.powf(p) }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mark {
    pub y: f64,
    pub omega: Complex64,
    pub epsilon: u8,
}

/// Truncated PWIT in heap order: vertex 0 is the root and the children of
/// vertex `g` are `g·m + 1 ..= g·m + m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PwitTree {
    pub depth: usize,
    pub branching: usize,
    pub alpha: f64,
    /// `marks[g - 1]` is the mark of the edge from vertex `g` to its parent.
    pub marks: Vec<Mark>,
}

impl PwitTree {
    pub fn vertex_count(&self) -> usize {
        vertex_count(self.depth, self.branching)
    }

    /// Vertices strictly above the truncation level.
    pub fn internal_count(&self) -> usize {
        if self.depth == 0 { 0 } else { vertex_count(self.depth - 1, self.branching) }
    }

    pub fn children(&self, g: usize) -> std::ops::Range<usize> {
        let m = self.branching;
        g * m + 1..g * m + m + 1
    }

    pub fn mark(&self, g: usize) -> Option<&Mark> {
        g.checked_sub(1).and_then(|i| self.marks.get(i))
    }
}

fn vertex_count(depth: usize, m: usize) -> usize {
    (0..=depth).map(|k| m.pow(k as u32)).sum()
}

/// Samples the marks of a truncated PWIT: sibling weights are partial sums of
/// Exp(rate 2) gaps, phases follow `phase`, orientations are Bernoulli(1/2).
pub fn sample_pwit(depth: usize, branching: usize, alpha: f64, phase: Phase, seed: Seed) -> Result<PwitTree> {
    check_alpha(alpha)?;
    if branching == 0 {
        return Err(Error::InvalidParameter("branching must be at least 1".into()));
    }
    let mut tree = PwitTree { depth, branching, alpha, marks: Vec::new() };
    let internal = tree.internal_count();
    let mut rng = seed.rng();
    let mut marks = Vec::with_capacity(tree.vertex_count() - 1);
    for _ in 0..internal {
        let mut y = 0.0;
        for _ in 0..branching {
            let e: f64 = Exp1.sample(&mut rng);
            y += 0.5 * e;
            let w = rng.next_u64();
            marks.push(Mark { y, omega: phase.draw(w), epsilon: (w & 1) as u8 });
        }
    }
    tree.marks = marks;
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_reproduce_and_streams_differ() {
        let a = Seed::new(5, 0).rng().next_u64();
        let b = Seed::new(5, 0).rng().next_u64();
        let c = Seed::new(5, 1).rng().next_u64();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(Seed::new(5, 0).child(0), Seed::new(5, 0).child(1));
    }

    #[test]
    fn unit_open_never_zero() {
        assert!(unit_open(0) > 0.0);
        assert_eq!(unit_open(u64::MAX), 1.0);
    }

    #[test]
    fn bernoulli_one_by_one_is_sign() {
        for s in 0..20 {
            let a = sample_iid_matrix(1, EntryLaw::SymmetricBernoulli, Seed::new(s, 0)).unwrap();
            let v = a.get(0, 0);
            assert!(v == Complex64::new(1.0, 0.0) || v == Complex64::new(-1.0, 0.0));
        }
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(
            sample_iid_matrix(0, EntryLaw::RealGaussian, Seed::new(0, 0)),
            Err(Error::InvalidDimension(_))
        ));
        assert!(sample_kostlan_moduli(0, Seed::new(0, 0)).is_err());
    }

    #[test]
    fn pwit_counts() {
        let t = sample_pwit(1, 3, 1.0, Phase::DeterministicOne, Seed::new(1, 0)).unwrap();
        assert_eq!(t.vertex_count(), 4);
        assert_eq!(t.marks.len(), 3);
        assert_eq!(t.children(0), 1..4);
        let t = sample_pwit(3, 2, 1.0, Phase::UniformCircle, Seed::new(1, 0)).unwrap();
        assert_eq!(t.vertex_count(), 15);
        assert_eq!(t.marks.len(), 14);
        let t = sample_pwit(0, 5, 1.0, Phase::DeterministicOne, Seed::new(1, 0)).unwrap();
        assert_eq!(t.vertex_count(), 1);
        assert!(t.marks.is_empty());
    }
}
