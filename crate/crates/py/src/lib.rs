//! Python bindings: parameter types, the path simulator, the exact-variate
//! oracle and a few bound/special-function helpers.
//!
//! Every sampling call takes a master seed. Path `i` draws from
//! `substream(seed, i)` and oracle batch `j` of 10 000 draws from
//! `substream(seed, 2^63 + j)`, the same as the `ghlevy` binary, so the two
//! give identical numbers for identical settings.

use ghlevy_core::envelope::{self, EnvelopeConfig};
use ghlevy_core::gh::{GhPath, GhSimulator};
use ghlevy_core::gig::ComponentReport;
use ghlevy_core::rng::substream;
use ghlevy_core::truncation::{EpsSchedule, TruncationConfig};
use ghlevy_core::{oracle, specfun, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

const ORACLE_STREAM: u64 = 1 << 63;
const ORACLE_BATCH: usize = 10_000;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::InvalidParams(_) | Error::EmptySample => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for ghlevy_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// GIG(lambda, delta, gamma) subordinator parameters.
#[pyclass(name = "GigParams", frozen, skip_from_py_object, module = "ghlevy")]
#[derive(Clone, Copy)]
pub struct PyGigParams {
    pub inner: ghlevy_core::GigParams,
}

#[pymethods]
impl PyGigParams {
    #[new]
    fn new(lambda: f64, delta: f64, gamma: f64) -> PyResult<Self> {
        Ok(Self { inner: ghlevy_core::GigParams::new(lambda, delta, gamma).py()? })
    }

    #[getter]
    fn lambda(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    fn __repr__(&self) -> String {
        let p = self.inner;
        format!("GigParams(lambda={}, delta={}, gamma={})", p.lambda, p.delta, p.gamma)
    }
}

/// GH process parameters; jumps are mu + beta*x + sigma*sqrt(x)*N(0, 1).
#[pyclass(name = "GhParams", frozen, skip_from_py_object, module = "ghlevy")]
#[derive(Clone, Copy)]
pub struct PyGhParams {
    pub inner: ghlevy_core::GhParams,
}

#[pymethods]
impl PyGhParams {
    #[new]
    #[pyo3(signature = (lambda, delta, gamma, beta = 0.0, mu = 0.0, sigma = 1.0))]
    fn new(lambda: f64, delta: f64, gamma: f64, beta: f64, mu: f64, sigma: f64) -> PyResult<Self> {
        let gig = ghlevy_core::GigParams::new(lambda, delta, gamma).py()?;
        Ok(Self { inner: ghlevy_core::GhParams::new(gig, mu, beta, sigma).py()? })
    }

    /// Classical (lambda, alpha, beta, delta, mu) form with sigma = 1.
    #[staticmethod]
    #[pyo3(signature = (lambda, alpha, beta, delta, mu = 0.0))]
    fn from_alpha(lambda: f64, alpha: f64, beta: f64, delta: f64, mu: f64) -> PyResult<Self> {
        Ok(Self { inner: ghlevy_core::GhParams::from_alpha(lambda, alpha, beta, delta, mu).py()? })
    }

    #[getter]
    fn gig(&self) -> PyGigParams {
        PyGigParams { inner: self.inner.gig }
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    fn __repr__(&self) -> String {
        let p = self.inner;
        format!(
            "GhParams(lambda={}, delta={}, gamma={}, beta={}, mu={}, sigma={})",
            p.gig.lambda, p.gig.delta, p.gig.gamma, p.beta, p.mu, p.sigma
        )
    }
}

/// Adaptive truncation settings. Pass `levels` for an explicit decreasing
/// schedule; otherwise the schedule is eps_first * eps_ratio^n.
#[pyclass(name = "TruncationConfig", frozen, skip_from_py_object, module = "ghlevy")]
#[derive(Clone)]
pub struct PyTruncationConfig {
    pub inner: TruncationConfig,
}

#[pymethods]
impl PyTruncationConfig {
    #[new]
    #[pyo3(signature = (
        tau = 0.01, p_t = 0.05, *, beta0 = 2.0, optimize_beta0 = false, mean_adjust = true,
        gaussian_residual = true, eps_first = 1.0, eps_ratio = 0.5, max_levels = 200, levels = None
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        tau: f64,
        p_t: f64,
        beta0: f64,
        optimize_beta0: bool,
        mean_adjust: bool,
        gaussian_residual: bool,
        eps_first: f64,
        eps_ratio: f64,
        max_levels: usize,
        levels: Option<Vec<f64>>,
    ) -> PyResult<Self> {
        let schedule = match levels {
            Some(levels) => EpsSchedule::Explicit { levels },
            None => EpsSchedule::Geometric { first: eps_first, ratio: eps_ratio, max_levels },
        };
        let inner = TruncationConfig { tau, p_t, schedule, beta0, optimize_beta0, mean_adjust, gaussian_residual };
        inner.validate().py()?;
        Ok(Self { inner })
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau
    }

    #[getter]
    fn p_t(&self) -> f64 {
        self.inner.p_t
    }

    #[getter]
    fn mean_adjust(&self) -> bool {
        self.inner.mean_adjust
    }

    #[getter]
    fn gaussian_residual(&self) -> bool {
        self.inner.gaussian_residual
    }

    fn __repr__(&self) -> String {
        format!("TruncationConfig({:?})", self.inner)
    }
}

/// Envelope breakpoints and squeeze switch. Unset fields take the defaults
/// for `params`; overriding z0 or z1 turns the squeeze off unless it is
/// requested explicitly.
#[pyclass(name = "EnvelopeConfig", frozen, skip_from_py_object, module = "ghlevy")]
#[derive(Clone, Copy)]
pub struct PyEnvelopeConfig {
    pub inner: EnvelopeConfig,
}

#[pymethods]
impl PyEnvelopeConfig {
    #[new]
    #[pyo3(signature = (params, z1 = None, z0 = None, squeeze = None))]
    fn new(params: &PyGigParams, z1: Option<f64>, z0: Option<f64>, squeeze: Option<bool>) -> PyResult<Self> {
        let d = EnvelopeConfig::for_params(&params.inner);
        let inner = EnvelopeConfig {
            z1: z1.unwrap_or(d.z1),
            z0: z0.unwrap_or(d.z0),
            squeeze: squeeze.unwrap_or(d.squeeze && z1.is_none() && z0.is_none()),
        };
        inner.validate(&params.inner).py()?;
        Ok(Self { inner })
    }

    #[getter]
    fn z1(&self) -> f64 {
        self.inner.z1
    }

    #[getter]
    fn z0(&self) -> f64 {
        self.inner.z0
    }

    #[getter]
    fn squeeze(&self) -> bool {
        self.inner.squeeze
    }

    fn __repr__(&self) -> String {
        let e = self.inner;
        format!("EnvelopeConfig(z1={}, z0={}, squeeze={})", e.z1, e.z0, if e.squeeze { "True" } else { "False" })
    }
}

fn component_dicts<'py>(py: Python<'py>, reports: &[ComponentReport]) -> PyResult<Vec<Bound<'py, PyDict>>> {
    reports
        .iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("kind", c.kind.label())?;
            d.set_item("eps_final", c.eps_final)?;
            d.set_item("slices", c.slices)?;
            d.set_item("mean_lower", c.residual.mean_lower)?;
            d.set_item("mean_upper", c.residual.mean_upper)?;
            d.set_item("var_lower", c.residual.var_lower)?;
            d.set_item("var_upper", c.residual.var_upper)?;
            d.set_item("proposed", c.stats.hankel.proposed)?;
            d.set_item("accepted", c.stats.hankel.accepted)?;
            d.set_item("squeezed", c.stats.squeezed)?;
            Ok(d)
        })
        .collect()
}

/// Path simulator for one parameter set over [0, horizon].
#[pyclass(name = "Simulator", frozen, module = "ghlevy")]
pub struct PySimulator {
    inner: GhSimulator,
}

impl PySimulator {
    fn run<T: Send>(&self, py: Python<'_>, n: usize, seed: u64, f: impl Fn(GhPath, &mut ghlevy_core::rng::StreamRng) -> ghlevy_core::Result<T> + Send + Sync) -> PyResult<Vec<T>> {
        py.detach(|| {
            (0..n as u64)
                .map(|i| {
                    let mut r = substream(seed, i);
                    let path = self.inner.path(&mut r)?;
                    f(path, &mut r)
                })
                .collect::<ghlevy_core::Result<Vec<T>>>()
        })
        .py()
    }
}

#[pymethods]
impl PySimulator {
    #[new]
    #[pyo3(signature = (params, truncation = None, envelope = None, horizon = 1.0))]
    fn new(params: &PyGhParams, truncation: Option<&PyTruncationConfig>, envelope: Option<&PyEnvelopeConfig>, horizon: f64) -> PyResult<Self> {
        let tc = truncation.map(|t| t.inner.clone()).unwrap_or_default();
        let env = envelope.map(|e| e.inner).unwrap_or_else(|| EnvelopeConfig::for_params(&params.inner.gig));
        Ok(Self { inner: GhSimulator::new(&params.inner, &tc, &env, horizon).py()? })
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.inner.horizon
    }

    /// Path values on `grid` for paths 0..n_paths, one list per path.
    fn simulate_paths(&self, py: Python<'_>, grid: Vec<f64>, n_paths: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
        self.run(py, n_paths, seed, |path, r| path.evaluate(&grid, r))
    }

    /// W(horizon) for paths 0..n.
    fn endpoints(&self, py: Python<'_>, n: usize, seed: u64) -> PyResult<Vec<f64>> {
        self.run(py, n, seed, |path, r| Ok(path.endpoint(r)))
    }

    /// Path `index`: jump times and sizes, residual drift and variance,
    /// and per-component truncation reports.
    fn path<'py>(&self, py: Python<'py>, seed: u64, index: u64) -> PyResult<Bound<'py, PyDict>> {
        let p = py.detach(|| self.inner.path(&mut substream(seed, index))).py()?;
        let d = PyDict::new(py);
        d.set_item("times", p.jumps.records.iter().map(|j| j.time).collect::<Vec<_>>())?;
        d.set_item("sizes", p.jumps.records.iter().map(|j| j.size).collect::<Vec<_>>())?;
        d.set_item("gig_sizes", p.gig_jumps.records.iter().map(|j| j.size).collect::<Vec<_>>())?;
        d.set_item("residual_drift", p.residual_drift)?;
        d.set_item("residual_var", p.residual_var)?;
        d.set_item("components", component_dicts(py, &p.components)?)?;
        Ok(d)
    }
}

/// Truncated GIG jump sizes (descending) over a unit horizon, with
/// per-component truncation reports.
#[pyfunction]
#[pyo3(signature = (params, seed, truncation = None, envelope = None))]
fn gig_sample<'py>(
    py: Python<'py>,
    params: &PyGigParams,
    seed: u64,
    truncation: Option<&PyTruncationConfig>,
    envelope: Option<&PyEnvelopeConfig>,
) -> PyResult<(Vec<f64>, Vec<Bound<'py, PyDict>>)> {
    let tc = truncation.map(|t| t.inner.clone()).unwrap_or_default();
    let env = envelope.map(|e| e.inner).unwrap_or_else(|| EnvelopeConfig::for_params(&params.inner));
    let s = py
        .detach(|| ghlevy_core::gig::sample_gig(&params.inner, &tc, &env, &mut substream(seed, 0)))
        .py()?;
    Ok((s.sizes, component_dicts(py, &s.components)?))
}

fn oracle_batches(n: usize, seed: u64, draw: impl Fn(&mut ghlevy_core::rng::StreamRng) -> ghlevy_core::Result<f64>) -> ghlevy_core::Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    for j in 0..n.div_ceil(ORACLE_BATCH) {
        let mut r = substream(seed, ORACLE_STREAM + j as u64);
        for _ in 0..ORACLE_BATCH.min(n - j * ORACLE_BATCH) {
            out.push(draw(&mut r)?);
        }
    }
    Ok(out)
}

/// Exact GIG(lambda, delta, gamma) variates.
#[pyfunction]
fn gig_variates(py: Python<'_>, params: &PyGigParams, n: usize, seed: u64) -> PyResult<Vec<f64>> {
    let p = params.inner;
    py.detach(|| oracle_batches(n, seed, |r| oracle::gig_variate(&p, r))).py()
}

/// Exact GH variates at unit time.
#[pyfunction]
fn gh_variates(py: Python<'_>, params: &PyGhParams, n: usize, seed: u64) -> PyResult<Vec<f64>> {
    let p = params.inner;
    py.detach(|| oracle_batches(n, seed, |r| oracle::gh_variate(&p, r))).py()
}

#[pyfunction]
fn gh_pdf(params: &PyGhParams, w: f64) -> PyResult<f64> {
    oracle::gh_pdf(&params.inner, w).py()
}

#[pyfunction]
fn gig_mean(params: &PyGigParams) -> PyResult<f64> {
    oracle::gig_mean(&params.inner).py()
}

/// Two-sample Kolmogorov-Smirnov statistic.
#[pyfunction]
fn ks_two_sample(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    oracle::ks_two_sample(&a, &b).py()
}

#[pyfunction]
fn ks_critical_value(alpha: f64, n: usize, m: usize) -> f64 {
    oracle::ks_critical_value(alpha, n, m)
}

/// Largest admissible breakpoint of the lower Hankel bound at order nu.
#[pyfunction]
fn z1_max(nu: f64) -> PyResult<f64> {
    envelope::z1_max(nu).py()
}

/// z (J_nu(z)^2 + Y_nu(z)^2).
#[pyfunction]
fn scaled_hankel_sq(nu: f64, z: f64) -> PyResult<f64> {
    specfun::scaled_hankel_sq(nu, z).py()
}

#[pyfunction]
fn bound_a(z: f64, nu: f64, z1: f64) -> f64 {
    envelope::bound_a(z, nu, z1)
}

#[pyfunction]
fn bound_b(z: f64, nu: f64, z0: f64, h0: f64) -> f64 {
    envelope::bound_b(z, nu, z0, h0)
}

#[pymodule]
fn ghlevy(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGigParams>()?;
    m.add_class::<PyGhParams>()?;
    m.add_class::<PyTruncationConfig>()?;
    m.add_class::<PyEnvelopeConfig>()?;
    m.add_class::<PySimulator>()?;
    m.add_function(wrap_pyfunction!(gig_sample, m)?)?;
    m.add_function(wrap_pyfunction!(gig_variates, m)?)?;
    m.add_function(wrap_pyfunction!(gh_variates, m)?)?;
    m.add_function(wrap_pyfunction!(gh_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(gig_mean, m)?)?;
    m.add_function(wrap_pyfunction!(ks_two_sample, m)?)?;
    m.add_function(wrap_pyfunction!(ks_critical_value, m)?)?;
    m.add_function(wrap_pyfunction!(z1_max, m)?)?;
    m.add_function(wrap_pyfunction!(scaled_hankel_sq, m)?)?;
    m.add_function(wrap_pyfunction!(bound_a, m)?)?;
    m.add_function(wrap_pyfunction!(bound_b, m)?)?;
    Ok(())
}
