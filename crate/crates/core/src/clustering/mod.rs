//! Reward clustering and failure-mode triggering.
//!
//! Rollout returns are clustered with a 1-D Gaussian mixture. Each rollout is
//! then hard-assigned to its most responsible component, which gives the
//! occupational frequency (a histogram over clusters). A cluster is a failure
//! mode when it is both likely enough and bad enough.

mod em;

pub use em::{
    em_fit, em_run, log_sum_exp, select_model, variance_floor, EmRun, GaussianComponent,
    GaussianMixture, MAX_ITERATIONS, RESTARTS, TOLERANCE,
};

use serde::Serialize;

use crate::error::ClusterError;
use crate::rollout::RolloutResult;

pub const DEFAULT_M_MAX: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub cluster_id: usize,
    /// Fraction of rollouts assigned to this cluster.
    pub frequency: f64,
    /// Mean return of the members; the component mean when there are none.
    pub mean_reward: f64,
    pub members: Vec<usize>,
    pub flagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerConfig {
    pub p_min: f64,
    pub r_fail: f64,
}

impl Default for TriggerConfig {
    fn default() -> Self {
        Self { p_min: 0.05, r_fail: -40.0 }
    }
}

impl TriggerConfig {
    pub fn new(p_min: f64, r_fail: f64) -> Result<Self, ClusterError> {
        if !(p_min > 0.0 && p_min < 1.0) {
            return Err(ClusterError::InvalidTrigger(format!("p_min must lie in (0, 1), got {p_min}")));
        }
        if !r_fail.is_finite() {
            return Err(ClusterError::InvalidTrigger("r_fail must be finite".into()));
        }
        Ok(Self { p_min, r_fail })
    }
}

/// Index of the most responsible component; ties go to the lower index.
pub fn most_responsible(mixture: &GaussianMixture, x: f64) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (j, c) in mixture.components.iter().enumerate() {
        let v = c.log_weighted_density(x);
        if v > best_val {
            best = j;
            best_val = v;
        }
    }
    best
}

pub fn assign_clusters(mixture: &GaussianMixture, results: &[RolloutResult]) -> Vec<ClusterSummary> {
    let m = mixture.components.len();
    let mut members = vec![Vec::new(); m];
    for r in results {
        members[most_responsible(mixture, r.ret)].push(r.index);
    }
    let k = results.len();
    let ret_of: std::collections::HashMap<usize, f64> = results.iter().map(|r| (r.index, r.ret)).collect();
    members
        .into_iter()
        .enumerate()
        .map(|(id, members)| {
            let mean_reward = if members.is_empty() {
                mixture.components[id].mean
            } else {
                members.iter().map(|i| ret_of[i]).sum::<f64>() / members.len() as f64
            };
            ClusterSummary {
                cluster_id: id,
                frequency: if k == 0 { 0.0 } else { members.len() as f64 / k as f64 },
                mean_reward,
                members,
                flagged: false,
            }
        })
        .collect()
}

/// Flags clusters with `frequency >= p_min` and `mean_reward <= r_fail`.
pub fn detect_failure_modes(clusters: &[ClusterSummary], trigger: TriggerConfig) -> Vec<ClusterSummary> {
    clusters
        .iter()
        .map(|c| ClusterSummary {
            flagged: c.frequency >= trigger.p_min && c.mean_reward <= trigger.r_fail,
            ..c.clone()
        })
        .collect()
}
