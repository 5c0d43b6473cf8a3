//! Python bindings: run episodes and trials, and inspect environments.
//! Results cross the boundary as JSON text.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use cogx_core::harness::{self, EpisodeConfig, HarnessError};
use cogx_core::reasoning::ReasonerKind;
use cogx_core::world::{resolve_environment, BUNDLED};

fn config(env: &str, task: &str, reasoner: &str, seed: u64, max_steps: Option<u64>) -> PyResult<EpisodeConfig> {
    let env = resolve_environment(env).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let kind: ReasonerKind = reasoner.parse().map_err(PyValueError::new_err)?;
    let mut cfg = EpisodeConfig::new(env, task, kind, seed);
    if let Some(n) = max_steps {
        cfg.params.max_steps = n;
    }
    Ok(cfg)
}

fn harness_err(e: HarnessError) -> PyErr {
    match e {
        HarnessError::Env(_) | HarnessError::Config(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Runs one episode and returns its result as a JSON object string.
#[pyfunction]
#[pyo3(signature = (env, task, reasoner, seed=0, max_steps=None))]
fn run_episode(py: Python<'_>, env: &str, task: &str, reasoner: &str, seed: u64, max_steps: Option<u64>) -> PyResult<String> {
    let cfg = config(env, task, reasoner, seed, max_steps)?;
    let r = py.detach(|| harness::run_episode(&cfg)).map_err(harness_err)?;
    Ok(serde_json::to_string(&r).expect("results serialize"))
}

/// Runs seeded trials and returns the summary as a JSON object string.
#[pyfunction]
#[pyo3(signature = (env, task, reasoner, trials=15, seed=0, max_steps=None))]
fn run_trials(
    py: Python<'_>,
    env: &str,
    task: &str,
    reasoner: &str,
    trials: usize,
    seed: u64,
    max_steps: Option<u64>,
) -> PyResult<String> {
    let cfg = config(env, task, reasoner, seed, max_steps)?;
    let (summary, _) = py.detach(|| harness::run_trials(&cfg, trials, true)).map_err(harness_err)?;
    Ok(serde_json::to_string(&summary).expect("summaries serialize"))
}

/// Environment file contents for a path or bundled name, after validation.
#[pyfunction]
fn environment_json(env: &str) -> PyResult<String> {
    resolve_environment(env).map(|e| e.to_json()).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyfunction]
fn bundled_environments() -> Vec<&'static str> {
    BUNDLED.to_vec()
}

#[pymodule]
fn cogx(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(run_episode, m)?)?;
    m.add_function(wrap_pyfunction!(run_trials, m)?)?;
    m.add_function(wrap_pyfunction!(environment_json, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_environments, m)?)?;
    Ok(())
}
