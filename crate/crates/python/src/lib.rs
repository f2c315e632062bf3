//! Python bindings: parameter and spectrum types plus the main analyses.
//!
//! Structured results come back as plain dicts and lists; complex numbers
//! inside serialized records are `[re, im]` pairs, while direct complex
//! arguments and return values use Python `complex`.

use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use thermosemi::characteristic::{spectral_abscissa_estimate, AbscissaSearch};
use thermosemi::dynamics::{self, DecayKind, History, ModeInitial, SimulationConfig};
use thermosemi::mode::{mode_energy, ModeForcing};
use thermosemi::params::{self, SystemKind};
use thermosemi::profile::ZProfile;
use thermosemi::resolvent::{self, mode_residual};
use thermosemi::spectrum::{make_spectrum, SpectrumSpec};
use thermosemi::{models, region, witness, Error};

fn err(e: Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    pythonize::pythonize(py, value).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Parameters of one delayed (or baseline) alpha-beta system.
#[pyclass(name = "ModelParams", module = "thermosemi", from_py_object)]
#[derive(Clone)]
struct PyModelParams {
    inner: params::ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (kind, beta, alpha, a=1.0, kappa=1.0, tau=1.0, xi=2.0))]
    fn new(kind: &str, beta: f64, alpha: f64, a: f64, kappa: f64, tau: f64, xi: f64) -> PyResult<Self> {
        let kind: SystemKind = kind.parse().map_err(err)?;
        let inner = params::ModelParams::new(kind, beta, alpha).with_a(a).with_kappa(kappa).with_tau(tau).with_xi(xi);
        inner.validate().map_err(err)?;
        Ok(PyModelParams { inner })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.name()
    }
    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }
    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }
    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }
    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa
    }
    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau
    }
    #[getter]
    fn xi(&self) -> f64 {
        self.inner.xi
    }

    /// The open or half-open interval of admissible `xi` as a dict.
    fn xi_admissible<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &params::xi_admissible(&self.inner).map_err(err)?)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "ModelParams(kind='{}', beta={}, alpha={}, a={}, kappa={}, tau={}, xi={})",
            p.kind.name(),
            p.beta,
            p.alpha,
            p.a,
            p.kappa,
            p.tau,
            p.xi
        )
    }
}

/// Eigenvalues `mu_n` of the underlying operator, from a descriptor such as
/// `string`, `plate:3.14`, `beam`, `power:1:2` or `list:1,4,9`.
#[pyclass(name = "Spectrum", module = "thermosemi", from_py_object)]
#[derive(Clone)]
struct PySpectrum {
    inner: thermosemi::spectrum::Spectrum,
}

#[pymethods]
impl PySpectrum {
    #[new]
    fn new(descriptor: &str) -> PyResult<Self> {
        let spec: SpectrumSpec = descriptor.parse().map_err(err)?;
        Ok(PySpectrum { inner: make_spectrum(spec).map_err(err)? })
    }

    /// `mu_n` for `n >= 1`.
    fn mu(&self, n: usize) -> PyResult<f64> {
        self.inner
            .eigenvalue(n)
            .ok_or_else(|| PyValueError::new_err(format!("no eigenvalue with index {n}")))
    }

    fn __repr__(&self) -> String {
        format!("Spectrum('{}')", self.inner.spec())
    }
}

/// Energy trajectory of a truncated modal simulation.
#[pyclass(name = "Trajectory", module = "thermosemi")]
struct PyTrajectory {
    inner: dynamics::Trajectory,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }
    #[getter]
    fn total_energy(&self) -> Vec<f64> {
        self.inner.total_energy.clone()
    }
    /// `per_mode_energy[k][j]`: mode `j + 1` at `times[k]`.
    #[getter]
    fn per_mode_energy(&self) -> Vec<Vec<f64>> {
        self.inner.per_mode_energy.clone()
    }
    #[getter]
    fn steps_per_delay(&self) -> usize {
        self.inner.steps_per_delay
    }
    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }
    #[getter]
    fn transport_check(&self) -> Option<f64> {
        self.inner.transport_check
    }

    /// Fits `exponential` or `polynomial` decay over `window = (lo, hi)`.
    #[pyo3(signature = (window, model="exponential"))]
    fn fit<'py>(&self, py: Python<'py>, window: (f64, f64), model: &str) -> PyResult<Bound<'py, PyAny>> {
        let kind = match model {
            "exponential" => DecayKind::Exponential,
            "polynomial" => DecayKind::Polynomial,
            other => return Err(PyValueError::new_err(format!("unknown decay model '{other}'"))),
        };
        to_py(py, &dynamics::fit_decay(&self.inner, window, kind).map_err(err)?)
    }

    fn __len__(&self) -> usize {
        self.inner.times.len()
    }
}

/// Stability and regularity labels of `(beta, alpha)`.
#[pyfunction]
fn classify_region(py: Python<'_>, beta: f64, alpha: f64) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &region::classify_region(beta, alpha).map_err(err)?)
}

/// Labels on a `grid x grid` lattice of the unit square.
#[pyfunction]
fn region_table(py: Python<'_>, grid: usize) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &region::region_table(grid).map_err(err)?)
}

#[pyfunction]
fn in_region_q(beta: f64, alpha: f64) -> bool {
    params::in_region_q(beta, alpha)
}

/// Solves one mode of `(i lambda - A) U = F` with a constant delay forcing `h`.
#[pyfunction]
#[pyo3(signature = (params, mu, lam, f1, f2, f3, h=C64::new(0.0, 0.0)))]
#[allow(clippy::too_many_arguments)]
fn solve_mode_resolvent<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    mu: f64,
    lam: f64,
    f1: C64,
    f2: C64,
    f3: C64,
    h: C64,
) -> PyResult<Bound<'py, PyDict>> {
    let p = &params.inner;
    let hz = if h == C64::new(0.0, 0.0) { ZProfile::zero() } else { ZProfile::constant(h) };
    let f = ModeForcing { f1, f2, f3, h: hz };
    let u = resolvent::solve_mode_resolvent(p, mu, lam, &f).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("u", u.u)?;
    d.set_item("v", u.v)?;
    d.set_item("theta", u.theta)?;
    d.set_item("z", u.z.samples(9))?;
    d.set_item("energy", mode_energy(&u, p, mu))?;
    d.set_item("forcing_energy", f.norm(p, mu).powi(2))?;
    d.set_item("residual", mode_residual(p, mu, lam, &u, &f))?;
    Ok(d)
}

/// Lower bound on the per-mode resolvent norm over `2 k_max + 1` trial profiles.
#[pyfunction]
#[pyo3(signature = (params, mu, lam, k_max=2))]
fn mode_resolvent_norm_lb(params: &PyModelParams, mu: f64, lam: f64, k_max: usize) -> PyResult<f64> {
    resolvent::mode_resolvent_norm_lb(&params.inner, mu, lam, k_max).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (params, spectrum, lambdas, k_max=2, n_max=1000))]
fn resolvent_scan<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    spectrum: &PySpectrum,
    lambdas: Vec<f64>,
    k_max: usize,
    n_max: usize,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &resolvent::resolvent_scan(&params.inner, &spectrum.inner, &lambdas, k_max, n_max).map_err(err)?)
}

/// Witness sweep over `indices`; returns `{"rows": [...], "summary": {...}}`.
#[pyfunction]
fn witness_sweep<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    spectrum: &PySpectrum,
    indices: Vec<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let sw = if params.inner.kind == SystemKind::DelayedDampingString {
        witness::string_witness_sweep(&indices, params.inner.a, params.inner.tau)
    } else {
        witness::witness_sweep(&params.inner, &spectrum.inner, &indices)
    }
    .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("rows", to_py(py, &sw.rows)?)?;
    d.set_item("summary", to_py(py, &witness::summarize(&sw))?)?;
    Ok(d)
}

/// Rightmost characteristic root of one mode.
#[pyfunction]
#[pyo3(signature = (params, mu, window=None, edge_samples=64, tolerance=1e-10))]
fn spectral_abscissa<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    mu: f64,
    window: Option<(f64, f64)>,
    edge_samples: usize,
    tolerance: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let search = AbscissaSearch { window, edge_samples, tolerance };
    to_py(py, &spectral_abscissa_estimate(&params.inner, mu, &search).map_err(err)?)
}

/// Simulates the first `len(initial)` modes; `initial` holds `(u0, u1, theta0)`.
#[pyfunction]
#[pyo3(signature = (params, spectrum, initial, horizon, steps_per_delay=64, record_every=1, history="constant", transport_check=false))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    params: &PyModelParams,
    spectrum: &PySpectrum,
    initial: Vec<(f64, f64, f64)>,
    horizon: f64,
    steps_per_delay: usize,
    record_every: usize,
    history: &str,
    transport_check: bool,
) -> PyResult<PyTrajectory> {
    let init = initial.into_iter().map(|(u0, u1, theta0)| ModeInitial { u0, u1, theta0 }).collect();
    let mut cfg = SimulationConfig::new(init, horizon);
    cfg.history = match history {
        "zero" => History::Zero,
        "constant" => History::Constant,
        other => return Err(PyValueError::new_err(format!("unknown history '{other}' (zero or constant)"))),
    };
    cfg.steps_per_delay = steps_per_delay;
    cfg.record_every = record_every;
    cfg.transport_check = transport_check;
    let (p, s) = (params.inner, spectrum.inner.clone());
    let inner = py.detach(move || dynamics::simulate(&p, &s, &cfg)).map_err(err)?;
    Ok(PyTrajectory { inner })
}

/// A named preset: `{"params", "spectrum", "witness_indices", "notes"}`.
#[pyfunction]
#[pyo3(signature = (name, length=None))]
fn preset<'py>(py: Python<'py>, name: &str, length: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
    let p = models::preset(name, length).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("params", PyModelParams { inner: p.params })?;
    d.set_item("spectrum", PySpectrum { inner: p.spectrum })?;
    d.set_item("witness_indices", p.witness_indices)?;
    d.set_item("notes", p.notes)?;
    Ok(d)
}

/// Runs the command-line interface; returns `(exit_code, stdout)`.
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String) {
    let mut out = Vec::new();
    let argv = std::iter::once("thermosemi".to_string()).chain(args);
    let code = thermosemi::cli::main_with_args(argv, &mut out);
    (code, String::from_utf8_lossy(&out).into_owned())
}

#[pymodule]
#[pyo3(name = "thermosemi")]
fn thermosemi_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PySpectrum>()?;
    m.add_class::<PyTrajectory>()?;
    m.add("PRESET_NAMES", models::PRESET_NAMES.to_vec())?;
    m.add_function(wrap_pyfunction!(classify_region, m)?)?;
    m.add_function(wrap_pyfunction!(region_table, m)?)?;
    m.add_function(wrap_pyfunction!(in_region_q, m)?)?;
    m.add_function(wrap_pyfunction!(solve_mode_resolvent, m)?)?;
    m.add_function(wrap_pyfunction!(mode_resolvent_norm_lb, m)?)?;
    m.add_function(wrap_pyfunction!(resolvent_scan, m)?)?;
    m.add_function(wrap_pyfunction!(witness_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_abscissa, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
