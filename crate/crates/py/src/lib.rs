//! Python bindings: spectra, coherent states, photon statistics, special
//! functions, and the resolution-of-unity verifier.
//!
//! Domain errors surface as `ValueError`, convergence failures as
//! `RuntimeError`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use gha_coherent::coherent::{self, CoherentState, SeriesOptions};
use gha_coherent::powerlaw::{Exponent, PowerLawSpec};
use gha_coherent::resolution::{self, WeightFunction};
use gha_coherent::special;
use gha_coherent::GhaError;

fn to_py_err(err: GhaError) -> PyErr {
    match err {
        GhaError::TailNotConverged { .. }
        | GhaError::NoConvergence(_)
        | GhaError::QuadratureFailure { .. }
        | GhaError::Inconclusive => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn parse_exponent(k: &Bound<'_, PyAny>) -> PyResult<Exponent> {
    if let Ok(value) = k.extract::<f64>() {
        if value.is_infinite() && value > 0.0 {
            return Ok(Exponent::Infinite);
        }
        // Range validation happens inside PowerLawSpec construction.
        return Ok(Exponent::Finite(value));
    }
    let text: String = k.extract().map_err(|_| {
        PyValueError::new_err("k must be a positive number, float('inf'), or the string 'inf'")
    })?;
    text.parse::<Exponent>().map_err(to_py_err)
}

fn options(rel_tol: f64, max_terms: usize) -> SeriesOptions {
    SeriesOptions { rel_tol, max_terms }
}

/// Power-law potential spectrum E_n = omega(k) * (n + gamma/4)^(2k/(k+2)).
#[pyclass(name = "PowerLawSpec", module = "gha_coherent_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySpec {
    inner: PowerLawSpec,
}

#[pymethods]
impl PySpec {
    /// PowerLawSpec(k, gamma=4.0): k > 0, float('inf') or "inf" for the
    /// square-well limit; gamma is the Maslov index.
    #[new]
    #[pyo3(signature = (k, gamma = 4.0))]
    fn new(k: &Bound<'_, PyAny>, gamma: f64) -> PyResult<Self> {
        let exponent = parse_exponent(k)?;
        let inner = PowerLawSpec::dimensionless(exponent, gamma).map_err(to_py_err)?;
        Ok(PySpec { inner })
    }

    /// Same spectrum with physical energy units; omega(k) is derived from
    /// the well strength V0, half-width a, and mass.
    fn physical(&self, v0: f64, a: f64, mass: f64) -> PyResult<Self> {
        let inner = self.inner.physical(v0, a, mass).map_err(to_py_err)?;
        Ok(PySpec { inner })
    }

    #[getter]
    fn k(&self) -> f64 {
        match self.inner.k {
            Exponent::Finite(k) => k,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    fn energy(&self, n: usize) -> PyResult<f64> {
        self.inner.energy(n).map_err(to_py_err)
    }

    /// Effective frequency omega(k); 1 in dimensionless mode.
    fn effective_frequency(&self) -> PyResult<f64> {
        if self.inner.use_physical_omega {
            self.inner.effective_frequency().map_err(to_py_err)
        } else {
            Ok(1.0)
        }
    }

    /// The characteristic function f with f(E_n) = E_{n+1}.
    fn characteristic(&self, x: f64) -> PyResult<f64> {
        self.inner.characteristic_value(x).map_err(to_py_err)
    }

    /// log g(n, k), the log of the coherent-state denominator product.
    fn log_g(&self, n: usize) -> PyResult<f64> {
        self.inner.log_g(n).map_err(to_py_err)
    }

    /// "tightening", "uniform", or "loosening" over the first n_max gaps.
    #[pyo3(signature = (n_max = 10))]
    fn spacing_class(&self, n_max: usize) -> PyResult<String> {
        self.inner
            .spacing_class(n_max)
            .map(|c| c.to_string())
            .map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "PowerLawSpec(k={}, gamma={})",
            self.inner.k, self.inner.gamma
        )
    }
}

/// Truncated coherent state |z> with unit norm.
#[pyclass(name = "CoherentState", module = "gha_coherent_py", frozen)]
struct PyState {
    inner: CoherentState,
}

#[pymethods]
impl PyState {
    #[getter]
    fn z(&self) -> Complex64 {
        self.inner.z()
    }

    #[getter]
    fn n_max(&self) -> usize {
        self.inner.n_max()
    }

    #[getter]
    fn norm_const(&self) -> f64 {
        self.inner.norm_const()
    }

    #[getter]
    fn tail_bound(&self) -> f64 {
        self.inner.tail_bound()
    }

    #[getter]
    fn spec(&self) -> PySpec {
        PySpec {
            inner: *self.inner.spec(),
        }
    }

    /// Amplitudes c_0..c_n_max as complex numbers.
    fn coeffs(&self) -> Vec<Complex64> {
        self.inner.coeffs()
    }

    /// Occupation probabilities |c_n|^2.
    fn photon_distribution(&self) -> Vec<f64> {
        self.inner.photon_distribution()
    }

    /// ||A|z> - z|z>|| / |z| against the ladder representation of the
    /// state's own spectrum.
    fn eigen_residual(&self) -> PyResult<f64> {
        let rep = self
            .inner
            .spec()
            .gha_rep(self.inner.n_max() + 1)
            .map_err(to_py_err)?;
        self.inner.eigen_residual(&rep).map_err(to_py_err)
    }

    /// <self|other>; both states must share a spectrum.
    fn overlap(&self, other: &PyState) -> PyResult<Complex64> {
        self.inner.overlap(&other.inner).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "CoherentState(z={}, n_max={}, spec={})",
            self.inner.z(),
            self.inner.n_max(),
            self.inner.spec().k
        )
    }
}

/// Build the normalized coherent state |z> for a spectrum.
#[pyfunction]
#[pyo3(signature = (spec, z, rel_tol = 1e-14, max_terms = 100_000))]
fn build_state(spec: &PySpec, z: Complex64, rel_tol: f64, max_terms: usize) -> PyResult<PyState> {
    coherent::build_state(&spec.inner, z, &options(rel_tol, max_terms))
        .map(|inner| PyState { inner })
        .map_err(to_py_err)
}

/// Normalization N(|z|^2, k) of the coherent-state series.
#[pyfunction]
#[pyo3(signature = (spec, z_sq, rel_tol = 1e-14, max_terms = 100_000))]
fn normalization(spec: &PySpec, z_sq: f64, rel_tol: f64, max_terms: usize) -> PyResult<f64> {
    coherent::normalization(&spec.inner, z_sq, &options(rel_tol, max_terms)).map_err(to_py_err)
}

/// <n> (order 1) or <n^2> (order 2) of the occupation distribution.
#[pyfunction]
#[pyo3(signature = (spec, z_sq, order, rel_tol = 1e-14, max_terms = 100_000))]
fn photon_moment(
    spec: &PySpec,
    z_sq: f64,
    order: u32,
    rel_tol: f64,
    max_terms: usize,
) -> PyResult<f64> {
    coherent::photon_moment(&spec.inner, z_sq, order, &options(rel_tol, max_terms))
        .map_err(to_py_err)
}

/// Mandel Q = (var(n) - <n>) / <n> at |z|^2 = z_sq.
#[pyfunction]
#[pyo3(signature = (spec, z_sq, rel_tol = 1e-14, max_terms = 100_000))]
fn mandel_q(spec: &PySpec, z_sq: f64, rel_tol: f64, max_terms: usize) -> PyResult<f64> {
    coherent::mandel_q(&spec.inner, z_sq, &options(rel_tol, max_terms)).map_err(to_py_err)
}

/// Q over a |z| grid; returns one dict per grid point with keys
/// abs_z, q, mean_n, variance, n_max_used, tail_bound.
#[pyfunction]
#[pyo3(signature = (spec, grid, rel_tol = 1e-14, max_terms = 100_000))]
fn q_curve<'py>(
    py: Python<'py>,
    spec: &PySpec,
    grid: Vec<f64>,
    rel_tol: f64,
    max_terms: usize,
) -> PyResult<Bound<'py, PyList>> {
    let curve =
        coherent::q_curve(&spec.inner, &grid, &options(rel_tol, max_terms)).map_err(to_py_err)?;
    let list = PyList::empty(py);
    for s in &curve.samples {
        let row = PyDict::new(py);
        row.set_item("abs_z", s.abs_z)?;
        row.set_item("q", s.q)?;
        row.set_item("mean_n", s.mean_n)?;
        row.set_item("variance", s.variance)?;
        row.set_item("n_max_used", s.n_max_used)?;
        row.set_item("tail_bound", s.tail_bound)?;
        list.append(row)?;
    }
    Ok(list)
}

fn weight_bundle(name: &str) -> PyResult<(WeightFunction, PowerLawSpec, usize)> {
    let harmonic_spec =
        PowerLawSpec::with_default_gamma(Exponent::Finite(2.0)).map_err(to_py_err)?;
    let well_spec = PowerLawSpec::with_default_gamma(Exponent::Infinite).map_err(to_py_err)?;
    match name {
        "harmonic" => Ok((resolution::weight_harmonic(), harmonic_spec, 10)),
        "square-well-paper" => Ok((resolution::weight_square_well().paper, well_spec, 8)),
        "square-well-corrected" => {
            Ok((resolution::weight_square_well().corrected, well_spec, 8))
        }
        other => Err(PyValueError::new_err(format!(
            "weight must be 'harmonic', 'square-well-paper', or 'square-well-corrected', \
             got '{other}'"
        ))),
    }
}

/// Verify the resolution of unity for a closed-form weight via its
/// Stieltjes moments. Returns a dict with the scalar ratio, pass flags,
/// and per-moment rows.
#[pyfunction]
#[pyo3(signature = (weight = "harmonic", n_max = None, tol = 1e-6))]
fn verify_resolution<'py>(
    py: Python<'py>,
    weight: &str,
    n_max: Option<usize>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let (weight_fn, spec, default_n_max) = weight_bundle(weight)?;
    let report = resolution::verify_resolution(
        &spec,
        &weight_fn,
        n_max.unwrap_or(default_n_max),
        tol,
    )
    .map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("weight", &report.weight)?;
    out.set_item("n_max", report.n_max)?;
    out.set_item("tol", report.tol)?;
    out.set_item("scalar_ratio", report.scalar_ratio)?;
    out.set_item("passed", report.passed)?;
    out.set_item("normalized", report.normalized)?;
    let rows = PyList::empty(py);
    for r in &report.rows {
        let row = PyDict::new(py);
        row.set_item("n", r.n)?;
        row.set_item("moment", r.moment)?;
        row.set_item("target", r.target)?;
        row.set_item("ratio", r.ratio)?;
        row.set_item("quad_error", r.quad_error)?;
        rows.append(row)?;
    }
    out.set_item("rows", rows)?;
    Ok(out)
}

/// ln Γ(x) for x > 0.
#[pyfunction]
fn log_gamma(x: f64) -> PyResult<f64> {
    special::log_gamma(x).map_err(to_py_err)
}

/// Modified Bessel function I_order(x), order <= 3.
#[pyfunction]
fn bessel_i(order: u32, x: f64) -> PyResult<f64> {
    special::bessel_i(order, x).map_err(to_py_err)
}

/// Modified Bessel function K_order(x), order <= 2.
#[pyfunction]
fn bessel_k(order: u32, x: f64) -> PyResult<f64> {
    special::bessel_k(order, x).map_err(to_py_err)
}

#[pymodule]
fn gha_coherent_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpec>()?;
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(build_state, m)?)?;
    m.add_function(wrap_pyfunction!(normalization, m)?)?;
    m.add_function(wrap_pyfunction!(photon_moment, m)?)?;
    m.add_function(wrap_pyfunction!(mandel_q, m)?)?;
    m.add_function(wrap_pyfunction!(q_curve, m)?)?;
    m.add_function(wrap_pyfunction!(verify_resolution, m)?)?;
    m.add_function(wrap_pyfunction!(log_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_i, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_k, m)?)?;
    Ok(())
}
