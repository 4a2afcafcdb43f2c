use std::path::PathBuf;

use thiserror::Error;

use crate::flow::DiagnosticsRecord;

pub type Result<T> = std::result::Result<T, FlowError>;

#[derive(Debug, Error)]
pub enum FlowError {
    /// Input outside the domain of a closed-form evaluator.
    #[error("domain error: {0}")]
    Domain(String),

    /// Result not representable in f64 (typically e^{4t} overflow).
    #[error("range error: {0}")]
    Range(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    /// A field contained NaN or infinity where a finite value was required.
    #[error("non-finite value in {field} at node {index}")]
    NonFinite { field: &'static str, index: usize },

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error("interpolation point {point} outside the grid (extent {extent})")]
    OutsideGrid { point: f64, extent: f64 },

    #[error("time step is degenerate: {0}")]
    DegenerateStep(String),

    /// The explicit integrator blew up; carries the last finite record.
    #[error("numerical instability at t = {t}: {reason}")]
    Instability {
        t: f64,
        reason: String,
        last_record: Option<Box<DiagnosticsRecord>>,
    },

    #[error("hypothesis check failed: {0}")]
    Hypothesis(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("snapshot rejected: {0}")]
    Snapshot(String),

    #[error("history: {0}")]
    History(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl FlowError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FlowError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Fails with [`FlowError::NonFinite`] at the first NaN/inf entry.
pub(crate) fn ensure_finite(field: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(FlowError::NonFinite { field, index }),
        None => Ok(()),
    }
}
