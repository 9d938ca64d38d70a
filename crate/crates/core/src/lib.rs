//! Failure-mode identification for a simulated driving agent.
//!
//! The pipeline samples Monte Carlo rollouts from a scenario, clusters their
//! returns with a 1-D Gaussian mixture, flags clusters that are both likely
//! and costly, describes each flagged cluster by a minimal DNF over world
//! predicates, and renders that description as a handover alert.

pub mod clustering;
pub mod domain;
pub mod error;
pub mod explain;
pub mod labeling;
pub mod report;
pub mod rollout;
pub mod scenario;

pub use clustering::{
    assign_clusters, detect_failure_modes, em_fit, select_model, ClusterSummary, GaussianComponent,
    GaussianMixture, TriggerConfig,
};
pub use domain::{Action, ObjectKind, Scenario, SceneObject, Terminal, Weather, WorldState};
pub use error::{ClusterError, DomainError, Error, LabelError, Result, ScenarioError};
pub use explain::{extract_tokens, render, Explanation, Modality};
pub use labeling::{
    abstract_state, default_vocabulary, label_cluster, minimize, CoverInstance, CoverMethod,
    DnfLabel, Implicant, Minterm, PredicateVocabulary,
};
pub use report::{run_pipeline, RunOptions, RunOutcome};
pub use rollout::{run_monte_carlo, sample_rollout, RolloutConfig, RolloutResult};
pub use scenario::{load_scenario, parse_scenario};
