use fjlab::bounds::BoundsError;
use fjlab::experiments::ExperimentError;
use fjlab::{FjError, GraphError, LinalgError};
use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("output error: {0}")]
    Output(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Hypothesis(_) => 4,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(ConfigError::Conflict(msg.into()))
    }
}

impl From<FjError> for CliError {
    fn from(e: FjError) -> Self {
        match e {
            FjError::ZeroDegree { .. } | FjError::NotConvergent => {
                CliError::Hypothesis(e.to_string())
            }
            FjError::NotPositiveDefinite { .. }
            | FjError::MaxIterations { .. }
            | FjError::Linalg(_) => CliError::Numerical(e.to_string()),
            _ => CliError::config(e.to_string()),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::NoStubbornAgents => CliError::Hypothesis(e.to_string()),
            _ => CliError::config(e.to_string()),
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::DegreeBelowLogN { .. } | BoundsError::NeedsBothCommunities => {
                CliError::Hypothesis(e.to_string())
            }
            _ => CliError::config(e.to_string()),
        }
    }
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Unreachable { .. } => CliError::Hypothesis(e.to_string()),
            ExperimentError::Graph(g) => g.into(),
            ExperimentError::Fj(f) => f.into(),
            ExperimentError::Bounds(b) => b.into(),
            ExperimentError::Linalg(l) => l.into(),
            _ => CliError::config(e.to_string()),
        }
    }
}
