//! Numerical laboratory for non-Hermitian random matrices: ensembles, spectra,
//! logarithmic potentials, the quaternionic resolvent transform, limiting laws
//! and heavy-tailed fixed points on the Poisson weighted infinite tree.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod heavy;
pub mod laws;
pub mod matrix;
pub mod numerics;
pub mod rng;
pub mod special;
pub mod stats;
pub mod suites;
pub mod spectral;
pub mod transforms;

pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use num_complex::Complex64;
pub use rng::{EntryLaw, Phase, PwitTree, Seed};
pub use spectral::{EmpiricalMeasure1D, EmpiricalMeasure2D, SingularSpectrum, Spectrum};
