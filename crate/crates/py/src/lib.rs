//! Python bindings: scenario generation and file round-trip, plus one-shot
//! strategy solves returning a structured outcome. Build with
//! `cargo build --release -p mecsim-py`; the resulting cdylib imports as
//! the `mecsim` module (see python/smoke_test.py for the loader dance).

use mecsim_core::lower_level::{LowerHyper, Target};
use mecsim_core::outcome::{self, Strategy};
use mecsim_core::scenario::{self, GenConfig, Span};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use std::path::PathBuf;

fn scenario_err(e: scenario::ScenarioError) -> PyErr {
    match e {
        scenario::ScenarioError::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn target_label(t: Target) -> String {
    match t {
        Target::Local => "local".to_string(),
        Target::Server(k) => format!("server {k}"),
        Target::Unserved => "unserved".to_string(),
    }
}

/// A generated or loaded problem instance.
#[pyclass(module = "mecsim", frozen)]
struct Scenario {
    inner: scenario::Scenario,
}

#[pymethods]
impl Scenario {
    /// Draw a scenario from a seed. `tau_ms` fixes every deadline instead
    /// of the default 9-10 ms draw.
    #[staticmethod]
    #[pyo3(signature = (seed, users=5, servers=3, subcarriers=64, tau_ms=None))]
    fn generate(
        seed: u64,
        users: usize,
        servers: usize,
        subcarriers: usize,
        tau_ms: Option<f64>,
    ) -> PyResult<Self> {
        if users == 0 || servers == 0 || subcarriers == 0 {
            return Err(PyValueError::new_err(
                "users, servers, and subcarriers must be at least 1",
            ));
        }
        let mut cfg = GenConfig {
            seed,
            num_users: users,
            num_servers: servers,
            num_subcarriers: subcarriers,
            ..GenConfig::default()
        };
        if let Some(tau) = tau_ms {
            if !(tau > 0.0) {
                return Err(PyValueError::new_err("tau_ms must be positive"));
            }
            cfg.deadline_s = Span::new(tau / 1e3, tau / 1e3);
        }
        Ok(Scenario {
            inner: scenario::generate_scenario(&cfg),
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Scenario {
            inner: scenario::Scenario::load(&path).map_err(scenario_err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(scenario_err)
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn num_users(&self) -> usize {
        self.inner.num_users()
    }

    #[getter]
    fn num_servers(&self) -> usize {
        self.inner.num_servers()
    }

    #[getter]
    fn num_subcarriers(&self) -> usize {
        self.inner.params.num_subcarriers
    }

    /// Channel gain for one (user, subcarrier, server) triple.
    fn gain(&self, user: usize, subcarrier: usize, server: usize) -> PyResult<f64> {
        if user >= self.inner.num_users()
            || subcarrier >= self.inner.params.num_subcarriers
            || server >= self.inner.num_servers()
        {
            return Err(PyValueError::new_err("gain index out of range"));
        }
        Ok(self.inner.gains.get(user, subcarrier, server))
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(seed={}, users={}, servers={}, subcarriers={})",
            self.inner.seed,
            self.inner.num_users(),
            self.inner.num_servers(),
            self.inner.params.num_subcarriers
        )
    }
}

/// One user's slice of a solve.
#[pyclass(module = "mecsim", frozen)]
struct UserOutcome {
    #[pyo3(get)]
    target: String,
    #[pyo3(get)]
    deadline_met: bool,
    #[pyo3(get)]
    transmit_j: f64,
    #[pyo3(get)]
    compute_j: f64,
    /// End-to-end completion time in seconds; None when nothing completes.
    #[pyo3(get)]
    time_s: Option<f64>,
    #[pyo3(get)]
    rate_bps: f64,
}

#[pymethods]
impl UserOutcome {
    fn __repr__(&self) -> String {
        format!(
            "UserOutcome(target='{}', deadline_met={}, transmit_j={:e}, compute_j={:e})",
            self.target,
            if self.deadline_met { "True" } else { "False" },
            self.transmit_j,
            self.compute_j
        )
    }
}

/// Strategy-independent summary of one solve.
#[pyclass(module = "mecsim", frozen)]
struct Outcome {
    #[pyo3(get)]
    strategy: String,
    #[pyo3(get)]
    total_j: f64,
    #[pyo3(get)]
    compute_j: f64,
    #[pyo3(get)]
    transmit_j: f64,
    #[pyo3(get)]
    local_j: f64,
    #[pyo3(get)]
    served: usize,
    #[pyo3(get)]
    offloaders: usize,
    #[pyo3(get)]
    converged_fraction: f64,
    #[pyo3(get)]
    users: Vec<Py<UserOutcome>>,
}

#[pymethods]
impl Outcome {
    fn __repr__(&self) -> String {
        format!(
            "Outcome(strategy='{}', total_j={:e}, served={}/{})",
            self.strategy, self.total_j, self.served, self.offloaders
        )
    }
}

/// Run one strategy on a scenario. Strategies: eejs, hungarian, mdoa, roa,
/// aas, local. `roa_seed` defaults to the scenario seed; `max_iterations`
/// overrides the dual-loop cap.
#[pyfunction]
#[pyo3(signature = (scenario, strategy="eejs", roa_seed=None, max_iterations=None))]
fn solve(
    py: Python<'_>,
    scenario: &Scenario,
    strategy: &str,
    roa_seed: Option<u64>,
    max_iterations: Option<usize>,
) -> PyResult<Outcome> {
    let strategy: Strategy = strategy
        .parse()
        .map_err(|e: outcome::UnknownStrategy| PyValueError::new_err(e.to_string()))?;
    let mut hyper = LowerHyper::default();
    if let Some(cap) = max_iterations {
        hyper.max_iterations = cap;
    }
    let result = outcome::solve_with(
        strategy,
        &scenario.inner,
        &hyper,
        roa_seed.unwrap_or(scenario.inner.seed),
    );
    let users = result
        .per_user
        .iter()
        .map(|u| {
            Py::new(
                py,
                UserOutcome {
                    target: target_label(u.target),
                    deadline_met: u.deadline_met,
                    transmit_j: u.transmit_j,
                    compute_j: u.compute_j,
                    time_s: u.time_s.is_finite().then_some(u.time_s),
                    rate_bps: u.rate_bps,
                },
            )
        })
        .collect::<PyResult<Vec<_>>>()?;
    Ok(Outcome {
        strategy: result.strategy.name().to_string(),
        total_j: result.total_j(),
        compute_j: result.compute_j,
        transmit_j: result.transmit_j,
        local_j: result.local_j,
        served: result.served_count,
        offloaders: result.offloader_count,
        converged_fraction: result.converged_fraction,
        users,
    })
}

/// The strategy names `solve` accepts, in canonical order.
#[pyfunction]
fn strategies() -> Vec<&'static str> {
    Strategy::ALL.iter().map(|s| s.name()).collect()
}

#[pymodule]
fn mecsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_class::<Outcome>()?;
    m.add_class::<UserOutcome>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(strategies, m)?)?;
    Ok(())
}
