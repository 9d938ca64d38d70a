//! End-to-end run and its JSON report.
//!
//! The report is a `serde_json::Value` tree. Object keys come out sorted
//! because `serde_json::Map` is a `BTreeMap` without the `preserve_order`
//! feature. Every float is rounded to 9 significant digits before
//! serialization, so tiny platform differences in the last bits of a
//! log-likelihood do not leak into the bytes.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value};

use crate::clustering::{
    assign_clusters, detect_failure_modes, select_model, ClusterSummary, GaussianMixture, TriggerConfig,
    DEFAULT_M_MAX,
};
use crate::domain::Scenario;
use crate::error::{Error, LabelError};
use crate::explain::{render, Explanation, Modality};
use crate::labeling::{
    abstract_state, build_cover_instance, default_vocabulary, minimize, CoverInstance, CoverMethod, DnfLabel,
    Minterm,
};
use crate::rollout::{run_monte_carlo_with_threads, RolloutConfig, RolloutResult, DEFAULT_ROLLOUTS};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Echoed into `meta.scenario_path` exactly as given.
    pub scenario_path: String,
    pub rollouts: usize,
    pub seed: u64,
    pub modalities: Vec<Modality>,
    pub trigger: TriggerConfig,
    pub m_max: usize,
    pub method: CoverMethod,
    /// Rollout worker cap; `None` uses the rayon default.
    pub threads: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            scenario_path: String::new(),
            rollouts: DEFAULT_ROLLOUTS,
            seed: 0,
            modalities: Modality::ALL.to_vec(),
            trigger: TriggerConfig::default(),
            m_max: DEFAULT_M_MAX,
            method: CoverMethod::Ilp,
            threads: None,
        }
    }
}

/// Everything a run produced, plus the serialized report.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub results: Vec<RolloutResult>,
    pub mixture: GaussianMixture,
    pub clusters: Vec<ClusterSummary>,
    pub instances: BTreeMap<usize, CoverInstance>,
    pub labels: BTreeMap<usize, DnfLabel>,
    /// Flagged clusters whose targets were all ambiguous.
    pub ambiguous_clusters: Vec<usize>,
    /// Per flagged cluster, failure minterms also seen in successful rollouts.
    pub ambiguous_minterms: BTreeMap<usize, BTreeSet<u32>>,
    pub explanations: BTreeMap<usize, Vec<Explanation>>,
    pub predicate_names: Vec<String>,
    pub report: Value,
}

impl RunOutcome {
    pub fn flagged_count(&self) -> usize {
        self.clusters.iter().filter(|c| c.flagged).count()
    }

    /// True when clusters were flagged but none could be labeled.
    pub fn all_flagged_ambiguous(&self) -> bool {
        let flagged = self.flagged_count();
        flagged > 0 && self.ambiguous_clusters.len() == flagged
    }

    pub fn report_json(&self) -> String {
        to_report_string(&self.report)
    }
}

pub fn run_pipeline(scenario: &Scenario, opts: &RunOptions) -> Result<RunOutcome, Error> {
    let config = RolloutConfig { k: opts.rollouts, seed: opts.seed };
    let results = run_monte_carlo_with_threads(scenario, config, opts.threads);
    let rewards: Vec<f64> = results.iter().map(|r| r.ret).collect();
    let mixture = select_model(&rewards, opts.m_max, opts.seed)?;
    let clusters = detect_failure_modes(&assign_clusters(&mixture, &results), opts.trigger);

    let vocab = default_vocabulary(scenario);
    let mut instances = BTreeMap::new();
    let mut labels = BTreeMap::new();
    let mut ambiguous_clusters = Vec::new();
    let mut ambiguous_minterms = BTreeMap::new();
    let mut explanations = BTreeMap::new();
    for cluster in clusters.iter().filter(|c| c.flagged) {
        let instance = match build_cover_instance(cluster, &clusters, &results, &vocab) {
            Ok(instance) => instance,
            Err(LabelError::AmbiguousCluster { cluster_id }) => {
                let all: BTreeSet<u32> = cluster
                    .members
                    .iter()
                    .map(|&i| abstract_state(&results[i].outcome_state, &vocab).0)
                    .collect();
                ambiguous_minterms.insert(cluster_id, all);
                ambiguous_clusters.push(cluster_id);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        if !instance.ambiguous.is_empty() {
            ambiguous_minterms.insert(cluster.cluster_id, instance.ambiguous.clone());
        }
        let label = minimize(&instance, opts.method)?;
        let rendered = opts.modalities.iter().map(|&m| render(&label, m, cluster, &vocab)).collect();
        explanations.insert(cluster.cluster_id, rendered);
        labels.insert(cluster.cluster_id, label);
        instances.insert(cluster.cluster_id, instance);
    }

    let predicate_names: Vec<String> = vocab.names().into_iter().map(String::from).collect();
    let mut outcome = RunOutcome {
        results,
        mixture,
        clusters,
        instances,
        labels,
        ambiguous_clusters,
        ambiguous_minterms,
        explanations,
        predicate_names,
        report: Value::Null,
    };
    outcome.report = build_report(&outcome, opts, rewards.len());
    Ok(outcome)
}

fn method_name(method: CoverMethod) -> &'static str {
    match method {
        CoverMethod::QmPetrick => "qm",
        CoverMethod::Ilp => "ilp",
    }
}

fn build_report(out: &RunOutcome, opts: &RunOptions, n: usize) -> Value {
    let names: Vec<&str> = out.predicate_names.iter().map(String::as_str).collect();
    let n_vars = names.len();

    let meta = json!({
        "k": opts.rollouts,
        "m_max": opts.m_max,
        "method": method_name(opts.method),
        "modalities": opts.modalities.iter().map(|m| m.code()).collect::<Vec<_>>(),
        "p_min": opts.trigger.p_min,
        "predicates": names,
        "r_fail": opts.trigger.r_fail,
        "scenario_path": opts.scenario_path,
        "seed": opts.seed,
        "version": format!("sentinel {VERSION}"),
    });

    let mixture = json!({
        "bic": out.mixture.bic(n),
        "components": out.mixture.components.iter().map(|c| json!({
            "mean": c.mean,
            "variance": c.variance,
            "weight": c.weight,
        })).collect::<Vec<_>>(),
        "iterations": out.mixture.iterations,
        "log_likelihood": out.mixture.log_likelihood,
        "m": out.mixture.len(),
    });

    let clusters: Vec<Value> = out
        .clusters
        .iter()
        .map(|c| {
            json!({
                "cluster_id": c.cluster_id,
                "flagged": c.flagged,
                "frequency": c.frequency,
                "mean_reward": c.mean_reward,
                "members": c.members,
                "mixture_weight": out.mixture.components[c.cluster_id].weight,
                "size": c.members.len(),
            })
        })
        .collect();

    let labels: Map<String, Value> = out
        .labels
        .iter()
        .map(|(id, label)| {
            let v = json!({
                "clauses": label.render(&names),
                "cost": label.cost,
                "target_coverage": label.target_coverage,
            });
            (id.to_string(), v)
        })
        .collect();

    let explanations: Map<String, Value> = out
        .explanations
        .iter()
        .map(|(id, list)| {
            let per: Map<String, Value> = list
                .iter()
                .map(|e| (e.modality.code().to_string(), serde_json::to_value(e).expect("plain struct")))
                .collect();
            (id.to_string(), Value::Object(per))
        })
        .collect();

    let ambiguous: Map<String, Value> = out
        .ambiguous_minterms
        .iter()
        .map(|(id, set)| {
            let v = json!({
                "label_failed": out.ambiguous_clusters.contains(id),
                "minterms": set.iter().map(|&m| Minterm(m).to_bit_string(n_vars)).collect::<Vec<_>>(),
            });
            (id.to_string(), v)
        })
        .collect();

    let mut report = json!({
        "ambiguous": ambiguous,
        "clusters": clusters,
        "explanations": explanations,
        "labels": labels,
        "meta": meta,
        "mixture": mixture,
    });
    round_floats(&mut report);
    report
}

/// `x` rounded to 9 significant digits.
pub fn round_sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_sig9(n.as_f64().expect("f64 number"));
            *v = serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Pretty-printed report with a trailing newline.
pub fn to_report_string(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}
