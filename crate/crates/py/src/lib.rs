//! Python module `logsep`: thin wrappers over `logsep-core`.
//!
//! Complex fields cross the boundary as `(re, im)` lists on a symmetric grid
//! described by `Grid(half_width, h)`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use logsep_core::dynamics::{self, ForceLawOptions, ZetaOrigin};
use logsep_core::eigen::{EigenSettings, SpectralSolver};
use logsep_core::evolver::{self, EvolverConfig};
use logsep_core::experiments::{cli as core_cli, criteria};
use logsep_core::modulation::{self, ModulationMode};
use logsep_core::numerics::{Grid1D, WaveField};
use logsep_core::profiles;
use logsep_core::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) | Error::Regime(_) | Error::Json(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(a) => {
            let items = a.iter().map(|x| json_to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any()
        }
        Value::Object(m) => {
            let d = PyDict::new(py);
            for (k, x) in m {
                d.set_item(k, json_to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

#[pyclass(name = "ModelParams", from_py_object)]
#[derive(Clone)]
struct PyModelParams {
    inner: profiles::ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (p = 3.0, gamma = 0.0))]
    fn new(p: f64, gamma: f64) -> PyResult<Self> {
        Ok(Self { inner: profiles::ModelParams::new(p, gamma).map_err(to_py)? })
    }
    #[getter]
    fn p(&self) -> f64 {
        self.inner.p
    }
    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }
    fn __repr__(&self) -> String {
        format!("ModelParams(p={}, gamma={})", self.inner.p, self.inner.gamma)
    }
}

#[pyclass(name = "SolitonState", from_py_object)]
#[derive(Clone)]
struct PySolitonState {
    inner: profiles::SolitonState,
}

#[pymethods]
impl PySolitonState {
    #[new]
    fn new(lam: f64, gamma_phase: f64, z: f64, v: f64) -> PyResult<Self> {
        Ok(Self { inner: profiles::SolitonState::new(lam, gamma_phase, z, v).map_err(to_py)? })
    }
    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda
    }
    #[getter]
    fn gamma_phase(&self) -> f64 {
        self.inner.gamma_phase
    }
    #[getter]
    fn z(&self) -> f64 {
        self.inner.z
    }
    #[getter]
    fn v(&self) -> f64 {
        self.inner.v
    }
    fn as_tuple(&self) -> (f64, f64, f64, f64) {
        let [a, b, c, d] = self.inner.as_array();
        (a, b, c, d)
    }
    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!("SolitonState(lam={}, gamma_phase={}, z={}, v={})", s.lambda, s.gamma_phase, s.z, s.v)
    }
}

#[pyclass(name = "Grid", from_py_object)]
#[derive(Clone)]
struct PyGrid {
    inner: Grid1D,
}

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (half_width = 40.0, h = 0.02))]
    fn new(half_width: f64, h: f64) -> PyResult<Self> {
        Ok(Self { inner: Grid1D::symmetric(half_width, h).map_err(to_py)? })
    }
    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }
    #[getter]
    fn h(&self) -> f64 {
        self.inner.h
    }
    fn nodes(&self) -> Vec<f64> {
        self.inner.nodes()
    }
}

impl PyGrid {
    fn field(&self, re: Vec<f64>, im: Vec<f64>) -> PyResult<WaveField> {
        if re.len() != im.len() {
            return Err(PyValueError::new_err("re and im must have equal length"));
        }
        let values = re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect();
        WaveField::new(self.inner, values).map_err(to_py)
    }
}

/// `(s, z, v, energy_drift)`.
type OdeSamples = (Vec<f64>, Vec<f64>, Vec<f64>, f64);

fn split(u: &WaveField) -> (Vec<f64>, Vec<f64>) {
    (u.values.iter().map(|c| c.re).collect(), u.values.iter().map(|c| c.im).collect())
}

#[pyclass(name = "ForceLaw")]
struct PyForceLaw {
    inner: dynamics::ForceLaw,
}

#[pymethods]
impl PyForceLaw {
    /// Tabulates the force law; `origin` is `"anchored"` or `"asymptotic"`.
    #[new]
    #[pyo3(signature = (p = 3.0, gamma = 0.0, origin = "asymptotic"))]
    fn new(py: Python<'_>, p: f64, gamma: f64, origin: &str) -> PyResult<Self> {
        let origin = match origin {
            "anchored" => ZetaOrigin::Anchored,
            "asymptotic" => ZetaOrigin::Asymptotic,
            other => return Err(PyValueError::new_err(format!("unknown origin {other:?}"))),
        };
        let opts = ForceLawOptions { origin, ..Default::default() };
        let inner = py.detach(|| dynamics::ForceLaw::build(p, gamma, opts)).map_err(to_py)?;
        Ok(Self { inner })
    }
    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma
    }
    fn htilde(&self, z: f64) -> f64 {
        self.inner.htilde(z)
    }
    fn big_f(&self, z: f64) -> f64 {
        self.inner.big_f(z)
    }
    fn energy(&self, z: f64, v: f64) -> f64 {
        self.inner.energy(z, v)
    }
    fn classical_velocity(&self, z: f64) -> PyResult<f64> {
        self.inner.classical_velocity(z).map_err(to_py)
    }
    fn zeta(&self, z: f64) -> PyResult<f64> {
        self.inner.zeta(z).map_err(to_py)
    }
    fn zeta_inverse(&self, s: f64) -> PyResult<f64> {
        self.inner.zeta_inverse(s).map_err(to_py)
    }
    /// Effective ODE from `(s0, z0, v0)` to `s1`; returns `(s, z, v, energy_drift)`.
    #[pyo3(signature = (z0, v0, s0, s1, dt = 0.05))]
    fn integrate(&self, z0: f64, v0: f64, s0: f64, s1: f64, dt: f64) -> PyResult<OdeSamples> {
        let tr = dynamics::integrate_ode(&self.inner, z0, v0, (s0, s1), dt).map_err(to_py)?;
        Ok((tr.s, tr.z, tr.v, tr.energy_drift))
    }
}

#[pyfunction]
fn q_profile(x: f64, p: f64) -> f64 {
    profiles::q_profile(x, p)
}

#[pyfunction]
fn cp_constant(p: f64) -> PyResult<f64> {
    profiles::cp_constant(p).map_err(to_py)
}

/// The two-soliton family member at `state`, as `(re, im)`.
#[pyfunction]
#[pyo3(signature = (grid, state, p = 3.0))]
fn family_member(grid: &PyGrid, state: &PySolitonState, p: f64) -> (Vec<f64>, Vec<f64>) {
    split(&modulation::family_member(&grid.inner, &state.inner, p))
}

/// `{z, nu, tau, rho, t_at_delta}` for the perturbed translational mode.
#[pyfunction]
fn spectral<'py>(py: Python<'py>, p: f64, gamma: f64, z: f64) -> PyResult<Bound<'py, PyAny>> {
    let q = py
        .detach(|| SpectralSolver::new(p, EigenSettings::default()).and_then(|s| s.quantities(gamma, z)))
        .map_err(to_py)?;
    let v = serde_json::to_value(q).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

/// Decomposes `(re, im)` near `guess`; `mode` is `"full"` or `"three_plus_law"`.
/// Returns `(state, residuals, xi_h1)`.
#[pyfunction]
#[pyo3(signature = (grid, re, im, guess, params, mode = "full"))]
fn decompose(
    py: Python<'_>,
    grid: &PyGrid,
    re: Vec<f64>,
    im: Vec<f64>,
    guess: &PySolitonState,
    params: &PyModelParams,
    mode: &str,
) -> PyResult<(PySolitonState, Vec<f64>, f64)> {
    let mode = match mode {
        "full" => ModulationMode::Full,
        "three_plus_law" => ModulationMode::ThreePlusLaw,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let u = grid.field(re, im)?;
    let r = py.detach(|| modulation::decompose(&u, &guess.inner, &params.inner, mode)).map_err(to_py)?;
    Ok((PySolitonState { inner: r.state }, r.residuals.to_vec(), r.xi_h1))
}

/// Evolves `(re, im)` from `t0` to `t1`; returns `(re, im, mass_drift, energy_drift)`.
#[pyfunction]
#[pyo3(signature = (grid, re, im, params, t0, t1, dt = 1e-3))]
#[allow(clippy::too_many_arguments)]
fn evolve(
    py: Python<'_>,
    grid: &PyGrid,
    re: Vec<f64>,
    im: Vec<f64>,
    params: &PyModelParams,
    t0: f64,
    t1: f64,
    dt: f64,
) -> PyResult<(Vec<f64>, Vec<f64>, f64, f64)> {
    let u = grid.field(re, im)?;
    let out = py
        .detach(|| EvolverConfig::new(params.inner, dt).and_then(|cfg| evolver::evolve(&u, t0, t1, &cfg)))
        .map_err(to_py)?;
    if let Some(t) = out.blowup {
        return Err(PyRuntimeError::new_err(format!("non-finite field at t = {t}")));
    }
    let (r, i) = split(&out.u);
    Ok((r, i, out.mass_drift, out.energy_drift))
}

/// Runs acceptance criterion `id` (1 to 10); returns `(passed, metrics)`.
#[pyfunction]
fn run_criterion<'py>(py: Python<'py>, id: u8) -> PyResult<(bool, Bound<'py, PyAny>)> {
    let r = py.detach(|| criteria::run(id)).map_err(to_py)?;
    Ok((r.passed, json_to_py(py, &r.metrics)?))
}

/// The `logsep` command line; returns the exit status.
#[pyfunction]
fn cli(py: Python<'_>, argv: Vec<String>) -> i32 {
    py.detach(|| core_cli(std::iter::once("logsep".to_string()).chain(argv)))
}

#[pymodule]
fn logsep(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PySolitonState>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyForceLaw>()?;
    m.add_function(wrap_pyfunction!(q_profile, m)?)?;
    m.add_function(wrap_pyfunction!(cp_constant, m)?)?;
    m.add_function(wrap_pyfunction!(family_member, m)?)?;
    m.add_function(wrap_pyfunction!(spectral, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(run_criterion, m)?)?;
    m.add_function(wrap_pyfunction!(cli, m)?)?;
    Ok(())
}
