use thiserror::Error;

use crate::data::DataError;
use crate::lp::LpError;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("optimization failed: {0}")]
    Optimization(#[from] LpError),
    /// The requested constraints admit no model of the model class.
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),
    /// Per-feature bound failures as (feature index, message).
    #[error("bounds failed for {} feature(s): {}", .0.len(), describe(.0))]
    FeatureFailures(Vec<(usize, String)>),
    #[error("{failed} of {total} probes failed")]
    ProbeFailure { failed: usize, total: usize },
}

impl AnalysisError {
    /// True for solver failures as opposed to bad input.
    pub fn is_optimization_failure(&self) -> bool {
        matches!(
            self,
            Self::Optimization(_) | Self::FeatureFailures(_) | Self::ProbeFailure { .. }
        )
    }
}

fn describe(failures: &[(usize, String)]) -> String {
    failures
        .iter()
        .map(|(j, m)| format!("feature {j}: {m}"))
        .collect::<Vec<_>>()
        .join("; ")
}
