//! Python bindings: `import oppsched`.

use oppsched::analytic::{self, AnalyticReport};
use oppsched::error::Error;
use oppsched::point_process::{self, Thresholds};
use oppsched::report::{self, Format, Sweep};
use oppsched::{evt, mimo, scenario};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Parse { .. } | Error::Validation(_) | Error::Config(_) | Error::Domain(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Capacity distribution of one user.
#[pyclass(name = "UserProfile", frozen, from_py_object)]
#[derive(Clone)]
struct PyUserProfile {
    inner: point_process::UserProfile,
}

#[pymethods]
impl PyUserProfile {
    #[new]
    #[pyo3(signature = (mu, sigma, qos_p=None))]
    fn new(mu: f64, sigma: f64, qos_p: Option<f64>) -> PyResult<Self> {
        let inner = match qos_p {
            Some(p) => point_process::UserProfile::with_qos(mu, sigma, p),
            None => point_process::UserProfile::new(mu, sigma),
        }
        .map_err(py_err)?;
        Ok(Self { inner })
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
    fn qos_p(&self) -> Option<f64> {
        self.inner.qos_p
    }

    fn __repr__(&self) -> String {
        format!(
            "UserProfile(mu={}, sigma={}, qos_p={:?})",
            self.inner.mu, self.inner.sigma, self.inner.qos_p
        )
    }
}

/// Closed-form prediction for one scheme.
#[pyclass(name = "AnalyticReport", frozen, get_all)]
struct PyReport {
    scheme: String,
    expected_capacity: f64,
    p_idle: f64,
    p_collision: f64,
    p_utilized: f64,
    expected_delay_minislots: Option<f64>,
    thresholds: Vec<f64>,
    shares: Option<Vec<f64>>,
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!(
            "AnalyticReport(scheme={:?}, expected_capacity={}, p_idle={}, p_collision={}, p_utilized={})",
            self.scheme, self.expected_capacity, self.p_idle, self.p_collision, self.p_utilized
        )
    }
}

impl From<AnalyticReport> for PyReport {
    fn from(r: AnalyticReport) -> Self {
        let thresholds = match r.thresholds {
            Thresholds::Global(u) => vec![u],
            Thresholds::PerUser(v) => v,
        };
        Self {
            scheme: r.scheme.as_str().to_string(),
            expected_capacity: r.expected_capacity,
            p_idle: r.p_idle,
            p_collision: r.p_collision,
            p_utilized: r.p_utilized,
            expected_delay_minislots: r.expected_delay_minislots,
            thresholds,
            shares: r.shares,
        }
    }
}

fn profiles(v: Vec<PyUserProfile>) -> Vec<point_process::UserProfile> {
    v.into_iter().map(|p| p.inner).collect()
}

/// `(a, b)` normalizing constants for the maximum of `n` samples.
#[pyfunction]
#[pyo3(signature = (n, mu=0.0, sigma=1.0))]
fn norm_constants(n: u64, mu: f64, sigma: f64) -> PyResult<(f64, f64)> {
    let c = evt::norm_constants(n, mu, sigma).map_err(py_err)?;
    Ok((c.a, c.b))
}

#[pyfunction]
#[pyo3(signature = (n, mu=0.0, sigma=1.0))]
fn expected_max(n: u64, mu: f64, sigma: f64) -> PyResult<f64> {
    evt::expected_max(n, mu, sigma).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (k_users, k, mu=0.0, sigma=1.0))]
fn threshold_gaussian(k_users: u64, k: f64, mu: f64, sigma: f64) -> PyResult<f64> {
    evt::threshold_gaussian(k_users, k, mu, sigma).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (k_users, k, mu=0.0, sigma=1.0))]
fn threshold_gaussian_series(k_users: u64, k: f64, mu: f64, sigma: f64) -> PyResult<f64> {
    evt::threshold_gaussian_series(k_users, k, mu, sigma).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (k_users, k, mu=0.0, sigma=1.0))]
fn threshold_gumbel(k_users: u64, k: f64, mu: f64, sigma: f64) -> PyResult<f64> {
    evt::threshold_gumbel(k_users, k, mu, sigma).map_err(py_err)
}

/// Per-user exceedance rates and their total at a global threshold `u`.
#[pyfunction]
#[pyo3(signature = (u, profiles, exact_survival=false))]
fn total_rate(u: f64, profiles: Vec<PyUserProfile>, exact_survival: bool) -> PyResult<(Vec<f64>, f64)> {
    let model = if exact_survival {
        point_process::RateModel::ExactSurvival
    } else {
        point_process::RateModel::Evt
    };
    let r = point_process::total_rate_with(&Thresholds::Global(u), &self::profiles(profiles), model).map_err(py_err)?;
    Ok((r.per_user, r.total))
}

#[pyfunction]
#[pyo3(signature = (k_users, k, mu=0.0, sigma=1.0))]
fn capacity_homogeneous(k_users: u64, k: f64, mu: f64, sigma: f64) -> PyResult<PyReport> {
    analytic::capacity_homogeneous(k_users, k, mu, sigma)
        .map(Into::into)
        .map_err(py_err)
}

#[pyfunction]
fn capacity_heterogeneous(u: f64, profiles: Vec<PyUserProfile>) -> PyResult<PyReport> {
    analytic::capacity_heterogeneous(u, &self::profiles(profiles))
        .map(Into::into)
        .map_err(py_err)
}

#[pyfunction]
fn capacity_qos(profiles: Vec<PyUserProfile>) -> PyResult<PyReport> {
    analytic::capacity_qos(&self::profiles(profiles))
        .map(Into::into)
        .map_err(py_err)
}

#[pyfunction]
fn capacity_equal_share(profiles: Vec<PyUserProfile>) -> PyResult<PyReport> {
    analytic::capacity_equal_share(&self::profiles(profiles))
        .map(Into::into)
        .map_err(py_err)
}

#[pyfunction]
fn capacity_capture(u: f64, profiles: Vec<PyUserProfile>) -> PyResult<PyReport> {
    analytic::capacity_capture(u, &self::profiles(profiles))
        .map(Into::into)
        .map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (k_users, k, l, mu=0.0, sigma=1.0))]
fn capacity_enhanced(k_users: u64, k: f64, l: u32, mu: f64, sigma: f64) -> PyResult<PyReport> {
    analytic::capacity_enhanced(k_users, k, l, mu, sigma)
        .map(Into::into)
        .map_err(py_err)
}

#[pyfunction]
fn enhanced_utilized_prob(k_users: u64, k: f64, l: u32) -> PyResult<f64> {
    analytic::enhanced_utilized_prob(k_users, k, l).map_err(py_err)
}

/// `(exact, bound)` probability that `k` exceeders land in distinct bins.
#[pyfunction]
fn collision_free_bound(k: u64, l: u64) -> PyResult<(f64, f64)> {
    let c = analytic::collision_free_bound(k, l).map_err(py_err)?;
    Ok((c.exact, c.bound))
}

/// Run a scenario given as text and return one dict per grid point.
#[pyfunction]
#[pyo3(signature = (text, sweep=None, slots=None, seed=None, threads=1))]
fn run_scenario<'py>(
    py: Python<'py>,
    text: &str,
    sweep: Option<&str>,
    slots: Option<u64>,
    seed: Option<u64>,
    threads: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let mut config = scenario::parse_scenario(text).map_err(py_err)?;
    if let Some(s) = slots {
        config.slots = s;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    config.validate().map_err(py_err)?;
    let sweep = sweep.map(Sweep::parse).transpose().map_err(py_err)?;
    let threads = threads.max(1);
    let records = py
        .detach(|| report::run_sweep(&config, sweep.as_ref(), threads, false))
        .map_err(py_err)?;
    let json = report::render(&records, Format::Json).map_err(py_err)?;
    py.import("json")?.call_method1("loads", (json,))
}

/// Capacities of an `r x t` Rayleigh channel: `(samples, mean, std)`.
#[pyfunction]
#[pyo3(signature = (r, t, power, n_samples, seed=0))]
fn sample_mimo_capacity(
    py: Python<'_>,
    r: usize,
    t: usize,
    power: f64,
    n_samples: usize,
    seed: u64,
) -> PyResult<(Vec<f64>, f64, f64)> {
    let s = py
        .detach(|| mimo::sample_mimo_capacity(r, t, power, n_samples, seed))
        .map_err(py_err)?;
    Ok((s.capacities, s.mean, s.std))
}

#[pymodule(name = "oppsched")]
fn oppsched_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyUserProfile>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(norm_constants, m)?)?;
    m.add_function(wrap_pyfunction!(expected_max, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_gaussian_series, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_gumbel, m)?)?;
    m.add_function(wrap_pyfunction!(total_rate, m)?)?;
    m.add_function(wrap_pyfunction!(capacity_homogeneous, m)?)?;
    m.add_function(wrap_pyfunction!(capacity_heterogeneous, m)?)?;
    m.add_function(wrap_pyfunction!(capacity_qos, m)?)?;
    m.add_function(wrap_pyfunction!(capacity_equal_share, m)?)?;
    m.add_function(wrap_pyfunction!(capacity_capture, m)?)?;
    m.add_function(wrap_pyfunction!(capacity_enhanced, m)?)?;
    m.add_function(wrap_pyfunction!(enhanced_utilized_prob, m)?)?;
    m.add_function(wrap_pyfunction!(collision_free_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(sample_mimo_capacity, m)?)?;
    Ok(())
}
