//! Python bindings: scenario loading, rollouts, mixture fitting, cover
//! minimization, alert rendering and the full pipeline.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use sentinel_core::clustering::{self, TriggerConfig, DEFAULT_M_MAX};
use sentinel_core::explain::{self, Modality};
use sentinel_core::labeling::{self, CoverInstance, CoverMethod};
use sentinel_core::report::{self, RunOptions};
use sentinel_core::rollout::{self, RolloutConfig, DEFAULT_ROLLOUTS};
use sentinel_core::scenario;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_method(method: &str) -> PyResult<CoverMethod> {
    match method {
        "qm" => Ok(CoverMethod::QmPetrick),
        "ilp" => Ok(CoverMethod::Ilp),
        other => Err(value_error(format!("unknown method `{other}` (expected qm or ilp)"))),
    }
}

#[pyclass(name = "Scenario", frozen)]
struct PyScenario {
    inner: sentinel_core::Scenario,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        scenario::load_scenario(path).map(|inner| Self { inner }).map_err(value_error)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        scenario::parse_scenario(text).map(|inner| Self { inner }).map_err(value_error)
    }

    fn to_json(&self) -> String {
        scenario::scenario_to_json(&self.inner)
    }

    #[getter]
    fn lanes(&self) -> usize {
        self.inner.lanes
    }

    #[getter]
    fn road_length(&self) -> usize {
        self.inner.road_length
    }

    #[getter]
    fn horizon(&self) -> u32 {
        self.inner.horizon
    }

    #[getter]
    fn policy_noise(&self) -> f64 {
        self.inner.policy_noise
    }

    /// Names of the labeling predicates for this scenario, in bit order.
    fn predicate_names(&self) -> Vec<String> {
        labeling::default_vocabulary(&self.inner).names().into_iter().map(String::from).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(lanes={}, road_length={}, horizon={}, objects={})",
            self.inner.lanes,
            self.inner.road_length,
            self.inner.horizon,
            self.inner.initial_state.objects.len()
        )
    }
}

#[pyclass(name = "Rollout", frozen, get_all)]
struct PyRollout {
    index: usize,
    ret: f64,
    outcome: String,
    length: u32,
    /// Minterm of the outcome state as a bit string, predicate 0 first.
    minterm: String,
}

#[pyfunction]
#[pyo3(signature = (scenario, k = DEFAULT_ROLLOUTS, seed = 0, threads = None))]
fn run_monte_carlo(scenario: &PyScenario, k: usize, seed: u64, threads: Option<usize>) -> Vec<PyRollout> {
    let sc = &scenario.inner;
    let vocab = labeling::default_vocabulary(sc);
    rollout::run_monte_carlo_with_threads(sc, RolloutConfig { k, seed }, threads)
        .into_iter()
        .map(|r| PyRollout {
            index: r.index,
            ret: r.ret,
            outcome: r.outcome.as_str().to_string(),
            length: r.length,
            minterm: labeling::abstract_state(&r.outcome_state, &vocab).to_bit_string(vocab.len()),
        })
        .collect()
}

#[pyclass(name = "GaussianMixture", frozen, get_all)]
struct PyMixture {
    means: Vec<f64>,
    variances: Vec<f64>,
    weights: Vec<f64>,
    log_likelihood: f64,
    iterations: usize,
}

impl From<clustering::GaussianMixture> for PyMixture {
    fn from(m: clustering::GaussianMixture) -> Self {
        Self {
            means: m.components.iter().map(|c| c.mean).collect(),
            variances: m.components.iter().map(|c| c.variance).collect(),
            weights: m.components.iter().map(|c| c.weight).collect(),
            log_likelihood: m.log_likelihood,
            iterations: m.iterations,
        }
    }
}

#[pymethods]
impl PyMixture {
    fn __len__(&self) -> usize {
        self.means.len()
    }

    fn __repr__(&self) -> String {
        format!("GaussianMixture(means={:?}, weights={:?})", self.means, self.weights)
    }
}

#[pyfunction]
#[pyo3(signature = (rewards, m, seed = 0))]
fn em_fit(rewards: Vec<f64>, m: usize, seed: u64) -> PyResult<PyMixture> {
    clustering::em_fit(&rewards, m, seed).map(PyMixture::from).map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (rewards, m_max = DEFAULT_M_MAX, seed = 0))]
fn select_model(rewards: Vec<f64>, m_max: usize, seed: u64) -> PyResult<PyMixture> {
    clustering::select_model(&rewards, m_max, seed).map(PyMixture::from).map_err(value_error)
}

#[pyclass(name = "DnfLabel", frozen, get_all)]
struct PyLabel {
    /// `(care, values)` bit masks per clause.
    clauses: Vec<(u32, u32)>,
    cost: f64,
    target_coverage: Vec<usize>,
}

#[pymethods]
impl PyLabel {
    /// Clauses as lists of signed predicate names.
    fn render(&self, names: Vec<String>) -> PyResult<Vec<Vec<String>>> {
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        self.clauses
            .iter()
            .map(|&(care, values)| {
                if (32 - care.leading_zeros()) as usize > refs.len() {
                    return Err(value_error("not enough predicate names for this label"));
                }
                Ok(labeling::Implicant::new(care, values).signed_names(&refs))
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("DnfLabel(clauses={:?}, cost={})", self.clauses, self.cost)
    }
}

/// Minimal DNF covering `targets` and no `negatives`. Minterms shared by both
/// sets are dropped from the targets first.
#[pyfunction]
#[pyo3(signature = (n_vars, targets, negatives, method = "ilp"))]
fn minimize_cover(n_vars: usize, targets: Vec<u32>, negatives: Vec<u32>, method: &str) -> PyResult<PyLabel> {
    let method = parse_method(method)?;
    let instance = CoverInstance::new(n_vars, targets, negatives);
    if instance.targets.is_empty() {
        return Err(value_error("no target minterm left after removing those shared with negatives"));
    }
    let label = labeling::minimize(&instance, method).map_err(value_error)?;
    Ok(PyLabel {
        clauses: label.clauses.iter().map(|c| (c.care, c.values)).collect(),
        cost: label.cost,
        target_coverage: label.target_coverage,
    })
}

/// Alert text for a modality code (`a`, `b1`..`b4`) and optional tokens.
#[pyfunction]
#[pyo3(signature = (modality, object = None, direction = None))]
fn render_alert(modality: &str, object: Option<&str>, direction: Option<&str>) -> PyResult<String> {
    let m: Modality = modality.parse().map_err(value_error)?;
    Ok(explain::render_tokens(m, object, direction))
}

/// Runs the whole pipeline and returns the JSON report text.
#[pyfunction]
#[pyo3(signature = (scenario_path, rollouts = DEFAULT_ROLLOUTS, seed = 0, p_min = 0.05, r_fail = -40.0, m_max = DEFAULT_M_MAX, method = "ilp", threads = None))]
#[allow(clippy::too_many_arguments)]
fn run(
    scenario_path: &str,
    rollouts: usize,
    seed: u64,
    p_min: f64,
    r_fail: f64,
    m_max: usize,
    method: &str,
    threads: Option<usize>,
) -> PyResult<String> {
    let sc = scenario::load_scenario(scenario_path).map_err(value_error)?;
    let opts = RunOptions {
        scenario_path: scenario_path.to_string(),
        rollouts,
        seed,
        modalities: Modality::ALL.to_vec(),
        trigger: TriggerConfig::new(p_min, r_fail).map_err(value_error)?,
        m_max,
        method: parse_method(method)?,
        threads,
    };
    let outcome = report::run_pipeline(&sc, &opts).map_err(value_error)?;
    Ok(outcome.report_json())
}

#[pymodule]
fn sentinel(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", report::VERSION)?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyRollout>()?;
    m.add_class::<PyMixture>()?;
    m.add_class::<PyLabel>()?;
    m.add_function(wrap_pyfunction!(run_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(em_fit, m)?)?;
    m.add_function(wrap_pyfunction!(select_model, m)?)?;
    m.add_function(wrap_pyfunction!(minimize_cover, m)?)?;
    m.add_function(wrap_pyfunction!(render_alert, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
