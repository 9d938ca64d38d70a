use thiserror::Error;

use crate::domain::Terminal;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("failed to read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed scenario JSON: {0}")]
    Parse(String),
    #[error("invalid scenario field `{field}`: {reason}")]
    Validation { field: String, reason: String },
}

impl ScenarioError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ScenarioError::Validation { field: field.into(), reason: reason.into() }
    }

    /// Offending field path for validation errors.
    pub fn field(&self) -> Option<&str> {
        match self {
            ScenarioError::Validation { field, .. } => Some(field),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DomainError {
    #[error("transition requested from terminal state ({})", .0.as_str())]
    InvalidState(Terminal),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClusterError {
    #[error("need at least {needed} rewards, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("all rewards identical; only a single component can be fitted")]
    DegenerateInput,
    #[error("invalid trigger configuration: {0}")]
    InvalidTrigger(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabelError {
    #[error("cluster {cluster_id} has no target minterm that is absent from the negative set")]
    AmbiguousCluster { cluster_id: usize },
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error("target minterm {0:#b} is covered by no candidate clause")]
    Infeasible(u32),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("cluster {0} is not flagged as a failure mode")]
    NotFlagged(usize),
}

/// Umbrella error for the end-to-end pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Label(#[from] LabelError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
