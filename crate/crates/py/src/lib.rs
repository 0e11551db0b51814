//! Python bindings: agent/split types, timing model, greedy scheduler, exact
//! oracle, AllReduce cost, and config-driven simulation and training.

use std::collections::BTreeMap;

use comdml_cli::{CliError, ExperimentConfig};
use comdml_core::learning::run_training;
use comdml_core::simulator::{simulate as simulate_method, Method};
use comdml_core::{self as core, Error as CoreError};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn core_err(e: CoreError) -> PyErr {
    match e {
        CoreError::Config(_) | CoreError::UnknownBaseline(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn cli_err(e: CliError) -> PyErr {
    match e {
        CliError::Runtime(msg) => PyRuntimeError::new_err(msg),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// One agent's resources: processing speed (batches/s), batches per round and links (bytes/s).
#[pyclass(name = "AgentProfile", from_py_object)]
#[derive(Clone)]
struct PyAgentProfile {
    inner: core::AgentProfile,
}

#[pymethods]
impl PyAgentProfile {
    #[new]
    #[pyo3(signature = (id, proc_speed, num_batches, links=None))]
    fn new(
        id: usize,
        proc_speed: f64,
        num_batches: u64,
        links: Option<BTreeMap<usize, f64>>,
    ) -> PyResult<Self> {
        let mut inner = core::AgentProfile::new(id, proc_speed, num_batches);
        inner.links = links.unwrap_or_default();
        inner.validate().map_err(core_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn id(&self) -> usize {
        self.inner.id
    }

    #[getter]
    fn proc_speed(&self) -> f64 {
        self.inner.proc_speed
    }

    #[getter]
    fn num_batches(&self) -> u64 {
        self.inner.num_batches
    }

    #[getter]
    fn links(&self) -> BTreeMap<usize, f64> {
        self.inner.links.clone()
    }

    /// Time to train alone: `num_batches / proc_speed`.
    fn individual_time(&self) -> f64 {
        core::individual_time(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "AgentProfile(id={}, proc_speed={}, num_batches={}, links={:?})",
            self.inner.id, self.inner.proc_speed, self.inner.num_batches, self.inner.links
        )
    }
}

/// Cost of splitting after layer `split_id`: slow/fast compute fractions and bytes per batch.
#[pyclass(name = "SplitProfile", from_py_object)]
#[derive(Clone)]
struct PySplitProfile {
    inner: core::SplitProfile,
}

#[pymethods]
impl PySplitProfile {
    #[new]
    fn new(split_id: usize, slow_frac: f64, fast_frac: f64, interm_bytes: f64) -> PyResult<Self> {
        let inner = core::SplitProfile::new(split_id, slow_frac, fast_frac, interm_bytes);
        inner.validate().map_err(core_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn split_id(&self) -> usize {
        self.inner.split_id
    }

    #[getter]
    fn slow_frac(&self) -> f64 {
        self.inner.slow_frac
    }

    #[getter]
    fn fast_frac(&self) -> f64 {
        self.inner.fast_frac
    }

    #[getter]
    fn interm_bytes(&self) -> f64 {
        self.inner.interm_bytes
    }

    fn __repr__(&self) -> String {
        format!(
            "SplitProfile(split_id={}, slow_frac={}, fast_frac={}, interm_bytes={})",
            self.inner.split_id,
            self.inner.slow_frac,
            self.inner.fast_frac,
            self.inner.interm_bytes
        )
    }
}

type PairTuple = (usize, usize, usize);

fn unwrap_agents(agents: &[PyAgentProfile]) -> Vec<core::AgentProfile> {
    agents.iter().map(|a| a.inner.clone()).collect()
}

fn table(splits: &[PySplitProfile]) -> core::SplitTable {
    core::SplitTable::shared(splits.iter().map(|s| s.inner).collect())
}

fn plan_tuple(plan: &core::PairingPlan) -> (Vec<PairTuple>, Vec<usize>) {
    (
        plan.pairs
            .iter()
            .map(|p| (p.slow, p.fast, p.split_id))
            .collect(),
        plan.independents.clone(),
    )
}

/// Split profiles of a named model preset, e.g. `"resnet56-like"`.
#[pyfunction]
fn preset_splits(name: &str) -> PyResult<Vec<PySplitProfile>> {
    let model = core::profiler::preset(name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown model preset `{name}`")))?;
    Ok(core::profile_splits(&model)
        .map_err(core_err)?
        .into_iter()
        .map(|inner| PySplitProfile { inner })
        .collect())
}

/// Completion times of an offloading pair as a dict.
#[pyfunction]
fn pair_time<'py>(
    py: Python<'py>,
    slow: &PyAgentProfile,
    fast: &PyAgentProfile,
    split: &PySplitProfile,
    fast_own_time: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let t =
        core::pair_time(&slow.inner, &fast.inner, &split.inner, fast_own_time).map_err(core_err)?;
    let d = PyDict::new(py);
    d.set_item("slow_total", t.slow_total)?;
    d.set_item("fast_total", t.fast_total)?;
    d.set_item("comm_s", t.comm_s)?;
    d.set_item("offloaded_compute_s", t.offloaded_compute_s)?;
    d.set_item("makespan", t.makespan())?;
    Ok(d)
}

/// Greedy slowest-first pairing. Returns `(pairs, independents)` with pairs as `(slow, fast, split_id)`.
#[pyfunction]
#[pyo3(signature = (agents, splits, improvement_threshold=0.0))]
fn schedule(
    agents: Vec<PyAgentProfile>,
    splits: Vec<PySplitProfile>,
    improvement_threshold: f64,
) -> (Vec<PairTuple>, Vec<usize>) {
    let s = core::schedule(
        &unwrap_agents(&agents),
        &table(&splits),
        core::PairingOptions {
            improvement_threshold,
        },
    );
    plan_tuple(&s.plan)
}

/// Round makespan of a pairing plan.
#[pyfunction]
fn plan_makespan(
    agents: Vec<PyAgentProfile>,
    pairs: Vec<PairTuple>,
    independents: Vec<usize>,
    splits: Vec<PySplitProfile>,
) -> PyResult<f64> {
    let plan = core::PairingPlan {
        pairs: pairs
            .into_iter()
            .map(|(slow, fast, split_id)| core::Pair {
                slow,
                fast,
                split_id,
            })
            .collect(),
        independents,
    };
    Ok(
        core::plan_makespan(&unwrap_agents(&agents), &plan, &table(&splits))
            .map_err(core_err)?
            .makespan_s,
    )
}

/// Exact minimum-makespan plan for up to 10 agents: `(makespan, pairs, independents, plans_examined)`.
#[pyfunction]
fn solve_exact(
    agents: Vec<PyAgentProfile>,
    splits: Vec<PySplitProfile>,
) -> PyResult<(f64, Vec<PairTuple>, Vec<usize>, u128)> {
    let r = core::solve_exact(&unwrap_agents(&agents), &table(&splits)).map_err(core_err)?;
    let (pairs, independents) = plan_tuple(&r.best_plan);
    Ok((r.best_makespan_s, pairs, independents, r.plans_examined))
}

/// AllReduce time: `steps * latency_s + volume / min_bandwidth`; algorithm is `"halving_doubling"` or `"ring"`.
#[pyfunction]
#[pyo3(signature = (algorithm, k, model_bytes, min_bandwidth, latency_s=0.0))]
fn allreduce_cost(
    algorithm: &str,
    k: usize,
    model_bytes: f64,
    min_bandwidth: f64,
    latency_s: f64,
) -> PyResult<f64> {
    let algorithm = match algorithm {
        "halving_doubling" => core::AllReduceAlgorithm::HalvingDoubling,
        "ring" => core::AllReduceAlgorithm::Ring,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown algorithm `{other}`"
            )))
        }
    };
    core::AllReduceModel::new(algorithm, latency_s, model_bytes)
        .cost(k, min_bandwidth)
        .map_err(core_err)
}

/// Simulates one method (`"comdml"` or a baseline name) under a TOML experiment config.
#[pyfunction]
fn simulate<'py>(py: Python<'py>, config_toml: &str, method: &str) -> PyResult<Bound<'py, PyDict>> {
    let cfg = ExperimentConfig::parse(config_toml).map_err(cli_err)?;
    let method: Method = method.parse().map_err(core_err)?;
    let sim = cfg.sim_config().map_err(cli_err)?;
    let r = py
        .detach(|| simulate_method(&sim, method))
        .map_err(core_err)?;
    let d = PyDict::new(py);
    d.set_item("method", &r.baseline_name)?;
    d.set_item("cumulative_time_s", r.cumulative_time_s)?;
    d.set_item(
        "makespan_s",
        r.rounds.iter().map(|x| x.makespan_s).collect::<Vec<_>>(),
    )?;
    d.set_item("aggregation_s", &r.per_round_aggregation_s)?;
    d.set_item(
        "pairs",
        r.pairs
            .iter()
            .map(|p| (p.round + 1, p.slow, p.fast, p.split_id, p.est_s, p.sim_s))
            .collect::<Vec<_>>(),
    )?;
    Ok(d)
}

/// Runs split training under a TOML experiment config; returns `(round, loss, accuracy, drift)` rows.
#[pyfunction]
fn train(py: Python<'_>, config_toml: &str) -> PyResult<Vec<(usize, f64, f64, f64)>> {
    let cfg = ExperimentConfig::parse(config_toml).map_err(cli_err)?;
    let training = cfg.training_config().map_err(cli_err)?;
    let report = py.detach(|| run_training(&training)).map_err(core_err)?;
    Ok(report
        .rounds
        .iter()
        .map(|m| {
            let drift = m.drift_at(report.drift_split).unwrap_or(f64::NAN);
            (m.round, m.loss, m.accuracy, drift)
        })
        .collect())
}

#[pymodule]
fn comdml(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAgentProfile>()?;
    m.add_class::<PySplitProfile>()?;
    m.add_function(wrap_pyfunction!(preset_splits, m)?)?;
    m.add_function(wrap_pyfunction!(pair_time, m)?)?;
    m.add_function(wrap_pyfunction!(schedule, m)?)?;
    m.add_function(wrap_pyfunction!(plan_makespan, m)?)?;
    m.add_function(wrap_pyfunction!(solve_exact, m)?)?;
    m.add_function(wrap_pyfunction!(allreduce_cost, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    Ok(())
}
