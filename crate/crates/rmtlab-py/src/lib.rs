//! Python module `rmtlab`: seeded ensembles, spectra, transforms, reference
//! laws, heavy-tail solvers and the verification suites.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rmtlab::heavy::{self, PopulationConfig, StableSampleBank};
use rmtlab::suites::{self, Suite, SuiteConfig};
use rmtlab::transforms::{self, QPoint};
use rmtlab::{laws, rng, spectral, stats, ComplexMatrix, EntryLaw, Error, Phase, Seed};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_)
        | Error::InvalidDimension(_)
        | Error::InsufficientSamples { .. }
        | Error::LengthMismatch { .. }
        | Error::Empty => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for rmtlab::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_law(ensemble: &str, alpha: f64, phase: &str) -> PyResult<EntryLaw> {
    let law = match ensemble {
        "ginibre-complex" => EntryLaw::ComplexGaussian,
        "ginibre-real" => EntryLaw::RealGaussian,
        "bernoulli" => EntryLaw::SymmetricBernoulli,
        "heavy" => {
            let phase = match phase {
                "one" => Phase::DeterministicOne,
                "rademacher" => Phase::Rademacher,
                "circle" => Phase::UniformCircle,
                other => return Err(PyValueError::new_err(format!("unknown phase '{other}'"))),
            };
            EntryLaw::HeavyTailed { alpha, phase }
        }
        other => return Err(PyValueError::new_err(format!("unknown ensemble '{other}'"))),
    };
    law.validate().py()?;
    Ok(law)
}

#[pyclass(name = "Seed", frozen, eq, from_py_object, module = "rmtlab")]
#[derive(Clone, Copy, PartialEq)]
struct PySeed(Seed);

#[pymethods]
impl PySeed {
    #[new]
    #[pyo3(signature = (master, stream = 0))]
    fn new(master: u64, stream: u64) -> Self {
        Self(Seed::new(master, stream))
    }

    #[getter]
    fn master(&self) -> u64 {
        self.0.master
    }

    #[getter]
    fn stream(&self) -> u64 {
        self.0.stream
    }

    fn child(&self, index: u64) -> Self {
        Self(self.0.child(index))
    }

    fn __repr__(&self) -> String {
        format!("Seed({}, {})", self.0.master, self.0.stream)
    }
}

fn seed_of(seed: &Bound<'_, PyAny>) -> PyResult<Seed> {
    if let Ok(s) = seed.extract::<PySeed>() {
        return Ok(s.0);
    }
    Ok(Seed::new(seed.extract::<u64>()?, 0))
}

/// Dense complex square matrix.
#[pyclass(name = "Matrix", frozen, module = "rmtlab")]
struct PyMatrix(ComplexMatrix);

#[pymethods]
impl PyMatrix {
    #[staticmethod]
    fn from_rows(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(Self(ComplexMatrix::from_rows(&rows).py()?))
    }

    /// i.i.d. matrix; `scale=True` divides by n^{1/2} (n^{1/α} for heavy tails).
    #[staticmethod]
    #[pyo3(signature = (ensemble, n, seed, alpha = 1.0, phase = "rademacher", scale = true))]
    fn sample(ensemble: &str, n: usize, seed: &Bound<'_, PyAny>, alpha: f64, phase: &str, scale: bool) -> PyResult<Self> {
        let law = parse_law(ensemble, alpha, phase)?;
        let x = rng::sample_iid_matrix(n, law, seed_of(seed)?).py()?;
        let nf = n as f64;
        Ok(Self(match (scale, law) {
            (false, _) => x,
            (true, EntryLaw::HeavyTailed { alpha, .. }) => x.scaled(nf.powf(-1.0 / alpha)),
            (true, _) => x.scaled(1.0 / nf.sqrt()),
        }))
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.nrows()
    }

    fn rows(&self) -> Vec<Vec<Complex64>> {
        self.0.to_rows()
    }

    fn __getitem__(&self, ij: (usize, usize)) -> PyResult<Complex64> {
        if ij.0 >= self.0.nrows() || ij.1 >= self.0.ncols() {
            return Err(pyo3::exceptions::PyIndexError::new_err("index out of range"));
        }
        Ok(self.0.get(ij.0, ij.1))
    }

    fn scaled(&self, s: f64) -> Self {
        Self(self.0.scaled(s))
    }

    fn bipartize(&self) -> Self {
        Self(spectral::bipartize(&self.0))
    }

    /// Eigenvalues by decreasing modulus, ties by increasing phase.
    fn eigenvalues(&self) -> PyResult<Vec<Complex64>> {
        Ok(spectral::eigenvalues(&self.0).py()?.values().to_vec())
    }

    /// Singular values, decreasing.
    fn singular_values(&self) -> PyResult<Vec<f64>> {
        Ok(spectral::singular_values(&self.0).py()?.values().to_vec())
    }

    /// −(1/n) log|det(A − z)|.
    fn log_potential(&self, z: Complex64) -> PyResult<f64> {
        transforms::log_potential_det(&self.0, z).py()
    }

    /// The 2×2 quaternionic resolvent transform at q(z, η) as a dict a, b, c, d.
    fn quaternionic_transform<'py>(&self, py: Python<'py>, z: Complex64, eta: Complex64) -> PyResult<Bound<'py, PyDict>> {
        let g = transforms::quaternionic_transform(&self.0, &QPoint::new(z, eta).py()?).py()?;
        let d = PyDict::new(py);
        for (k, v) in [("a", g.a), ("b", g.b), ("c", g.c), ("d", g.d)] {
            d.set_item(k, v)?;
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Matrix(n={})", self.0.nrows())
    }
}

/// Bank of i.i.d. pairs (S, S′) of one-sided α/2-stable variables.
#[pyclass(name = "StableSampleBank", frozen, module = "rmtlab")]
struct PyBank(StableSampleBank);

#[pymethods]
impl PyBank {
    #[new]
    #[pyo3(signature = (alpha, size, seed = None))]
    fn new(alpha: f64, size: usize, seed: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        let seed = seed.map(seed_of).transpose()?.unwrap_or(Seed::new(0, 0));
        Ok(Self(StableSampleBank::generate(alpha, size, seed).py()?))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }

    fn rde_y(&self, z: Complex64, t: f64) -> PyResult<f64> {
        Ok(heavy::rde_y(z, t, &self.0).py()?.y)
    }

    /// Dict with mean_h, se_h, mean_b and the solved y.
    fn h_moments<'py>(&self, py: Python<'py>, z: Complex64, t: f64) -> PyResult<Bound<'py, PyDict>> {
        let m = heavy::rde_h_moments(z, t, &self.0).py()?;
        let d = PyDict::new(py);
        d.set_item("y", m.solution.y)?;
        d.set_item("mean_h", m.mean_h)?;
        d.set_item("se_h", m.se_h)?;
        d.set_item("mean_b", m.mean_b)?;
        Ok(d)
    }

    #[pyo3(signature = (r, fd_step = None))]
    fn g_density(&self, r: f64, fd_step: Option<f64>) -> PyResult<f64> {
        heavy::heavy_density_g(r, &self.0, fd_step).py()
    }

    fn g_normalization<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &heavy::g_normalization(&self.0).py()?)
    }
}

#[pyfunction]
fn log_potential(atoms: Vec<Complex64>, z: Complex64) -> PyResult<f64> {
    transforms::log_potential_empirical(&atoms, z).py()
}

#[pyfunction]
fn cauchy_stieltjes(atoms: Vec<Complex64>, z: Complex64) -> PyResult<Complex64> {
    transforms::cauchy_stieltjes(&atoms, z).py()
}

#[pyfunction]
fn quarter_circular_density(x: f64) -> f64 {
    laws::quarter_circular_density(x)
}

#[pyfunction]
fn quarter_circular_cdf(x: f64) -> f64 {
    laws::quarter_circular_cdf(x)
}

#[pyfunction]
fn circular_modulus_cdf(r: f64) -> f64 {
    laws::circular_modulus_cdf(r)
}

#[pyfunction]
fn ginibre_mean_density(n: usize, z: Complex64) -> f64 {
    laws::ginibre_mean_density(n, z)
}

#[pyfunction]
fn kostlan_radius_cdf(n: usize, r: f64) -> f64 {
    laws::kostlan_radius_cdf(n, r)
}

#[pyfunction]
fn gumbel_standardize(n: usize, radius: f64) -> PyResult<f64> {
    laws::gumbel_standardize(n, radius).py()
}

#[pyfunction]
fn nu_z_fixed_point(z: Complex64, eta: Complex64) -> PyResult<Complex64> {
    laws::nu_z_fixed_point(z, eta).py()
}

#[pyfunction]
#[pyo3(signature = (z, x, eps = None))]
fn nu_z_density(z: Complex64, x: f64, eps: Option<Vec<f64>>) -> PyResult<f64> {
    laws::nu_z_density(z, x, &eps.unwrap_or(suites::NU_Z_EPS.to_vec())).py()
}

/// Density of the heavy-tailed singular value law by population dynamics.
#[pyfunction]
#[pyo3(signature = (z, xs, alpha, eps = None, seed = None))]
fn nu_alpha_z_table(z: Complex64, xs: Vec<f64>, alpha: f64, eps: Option<Vec<f64>>, seed: Option<&Bound<'_, PyAny>>) -> PyResult<Vec<f64>> {
    let seed = seed.map(seed_of).transpose()?.unwrap_or(Seed::new(0, 0));
    let eps = eps.unwrap_or(suites::NU_ALPHA_EPS.to_vec());
    heavy::nu_alpha_z_table(z, &xs, alpha, &eps, &PopulationConfig::default(), seed).py()
}

#[pyfunction]
fn sample_kostlan_moduli(n: usize, seed: &Bound<'_, PyAny>) -> PyResult<Vec<f64>> {
    rng::sample_kostlan_moduli(n, seed_of(seed)?).py()
}

#[pyfunction]
fn sample_positive_stable(alpha: f64, count: usize, seed: &Bound<'_, PyAny>) -> PyResult<Vec<f64>> {
    rng::sample_positive_stable(alpha, count, seed_of(seed)?).py()
}

#[pyfunction]
#[pyo3(signature = (samples, fraction = 0.05))]
fn tail_index_estimate(samples: Vec<f64>, fraction: f64) -> PyResult<f64> {
    heavy::tail_index_estimate(&samples, fraction).py()
}

#[pyfunction]
fn ks_two_sample(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    stats::ks_two_sample(&a, &b).py()
}

#[pyfunction]
fn suite_names() -> Vec<&'static str> {
    Suite::ALL.iter().map(|s| s.name()).collect()
}

/// Runs a verification suite; returns one dict per check.
#[pyfunction]
#[pyo3(signature = (name, seed = None, n = None, replicas = None, alpha = None))]
fn run_suite<'py>(
    py: Python<'py>,
    name: &str,
    seed: Option<&Bound<'py, PyAny>>,
    n: Option<usize>,
    replicas: Option<usize>,
    alpha: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let suite: Suite = name.parse().py()?;
    let seed = seed.map(seed_of).transpose()?.unwrap_or(Seed::new(0, 0));
    let cfg = SuiteConfig { n, replicas, alpha, seed };
    let reports = py.detach(|| suites::run_suite(suite, &cfg)).py()?;
    json_to_py(py, &reports)
}

#[pymodule]
#[pyo3(name = "rmtlab")]
fn rmtlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySeed>()?;
    m.add_class::<PyMatrix>()?;
    m.add_class::<PyBank>()?;
    m.add_function(wrap_pyfunction!(log_potential, m)?)?;
    m.add_function(wrap_pyfunction!(cauchy_stieltjes, m)?)?;
    m.add_function(wrap_pyfunction!(quarter_circular_density, m)?)?;
    m.add_function(wrap_pyfunction!(quarter_circular_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(circular_modulus_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(ginibre_mean_density, m)?)?;
    m.add_function(wrap_pyfunction!(kostlan_radius_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(gumbel_standardize, m)?)?;
    m.add_function(wrap_pyfunction!(nu_z_fixed_point, m)?)?;
    m.add_function(wrap_pyfunction!(nu_z_density, m)?)?;
    m.add_function(wrap_pyfunction!(nu_alpha_z_table, m)?)?;
    m.add_function(wrap_pyfunction!(sample_kostlan_moduli, m)?)?;
    m.add_function(wrap_pyfunction!(sample_positive_stable, m)?)?;
    m.add_function(wrap_pyfunction!(tail_index_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(ks_two_sample, m)?)?;
    m.add_function(wrap_pyfunction!(suite_names, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
