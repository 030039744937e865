use alloc::string::String;

/// Errors raised while configuring operators, problems and solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Two operands do not fit together.
    #[error("dimension mismatch in {context}: {left:?} vs {right:?} (rows, cols)")]
    DimensionMismatch {
        context: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Dense assembly was requested for an operator above the desk-scale limit.
    #[error("dense assembly of {entries} entries exceeds the limit of {limit}; matched mode is desk-scale only")]
    SizeGuard { entries: usize, limit: usize },

    /// The Tikhonov curve carries no usable information (no corner, no spread).
    #[error("degenerate regularization curve: {0}")]
    DegenerateCurve(&'static str),

    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
