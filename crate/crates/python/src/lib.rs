//! Python bindings. Structured results cross the boundary as JSON strings,
//! the same documents the CLI writes.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use asymcap::dmc::DEFAULT_CAPACITY_TOL;
use asymcap::harness::{self, ChannelSpec, ExperimentSpec};
use asymcap::{Dmc, InputDist};

fn py_err(e: asymcap::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_channel(channel: &str) -> PyResult<Dmc> {
    channel.parse().map_err(py_err)
}

/// Capacity report of a preset or inline-JSON channel, as JSON.
#[pyfunction]
pub fn capacity(channel: &str) -> PyResult<String> {
    let report = asymcap::dmc::capacity(&parse_channel(channel)?, DEFAULT_CAPACITY_TOL).map_err(py_err)?;
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// I(X;Y) in bits for transition rows `w[x][y]` and input law `p`.
#[pyfunction]
pub fn mutual_information(w: Vec<Vec<f64>>, p: Vec<f64>) -> PyResult<f64> {
    let ch = Dmc::new(w).map_err(py_err)?;
    asymcap::dmc::mutual_information(&ch, &InputDist::new(p).map_err(py_err)?).map_err(py_err)
}

/// `u G_n` over GF(2). Returns a list; a `Vec<u8>` would come back as bytes.
#[pyfunction]
pub fn polar_transform(bits: Vec<u8>) -> PyResult<Vec<u32>> {
    let x = asymcap::polar::polar_transform(&bits).map_err(py_err)?;
    Ok(x.into_iter().map(u32::from).collect())
}

#[pyfunction]
pub fn chain_rate(h2_alpha: f64, mutual_info: f64, cond_entropy: f64, sym_capacity: f64, k: usize) -> f64 {
    asymcap::chaining::chain_rate(h2_alpha, mutual_info, cond_entropy, sym_capacity, k)
}

/// Run an experiment spec (JSON) and return the report (JSON).
#[pyfunction]
fn run_experiment(py: Python<'_>, spec_json: &str) -> PyResult<String> {
    let spec = ExperimentSpec::from_json(spec_json).map_err(py_err)?;
    let report = py.detach(|| harness::run(&spec)).map_err(py_err)?;
    report.to_json().map_err(py_err)
}

/// Comparison table rows for a channel, as JSON.
#[pyfunction]
#[pyo3(signature = (channel, blocklen, budget, seed=1, samples=2000))]
fn compare_approaches(py: Python<'_>, channel: &str, blocklen: usize, budget: usize, seed: u64, samples: usize) -> PyResult<String> {
    let spec = ChannelSpec::Preset(channel.to_string());
    let rows = py.detach(|| harness::compare_approaches(&spec, blocklen, budget, seed, samples)).map_err(py_err)?;
    serde_json::to_string(&rows).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn asymcap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(capacity, m)?)?;
    m.add_function(wrap_pyfunction!(mutual_information, m)?)?;
    m.add_function(wrap_pyfunction!(polar_transform, m)?)?;
    m.add_function(wrap_pyfunction!(chain_rate, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(compare_approaches, m)?)?;
    Ok(())
}
