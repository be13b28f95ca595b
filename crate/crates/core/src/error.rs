use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("row {row} has zero total weight; cannot normalize")]
    DegenerateRow { row: usize },

    #[error("invalid Chebyshev bounds: mu ({mu}) must exceed nu ({nu})")]
    InvalidBounds { mu: f64, nu: f64 },

    #[error(
        "eigenvector estimate did not converge in {iterations} iterations \
         (last Rayleigh quotient change {change:e})"
    )]
    NonConvergence { iterations: usize, change: f64 },

    #[error("optimizer diverged: spectral radius {0} exceeds 1")]
    Divergence(f64),

    #[error("node {node} has no link with success probability >= {threshold}")]
    IsolatedNode { node: usize, threshold: f64 },

    #[error("learning rate outside the convergent regime: {0}")]
    LearningRateRegime(String),

    #[error("non-finite gradient at node {node} in round {round}")]
    NonFiniteGradient { node: usize, round: usize },

    #[error("{links} stochastic links exceed the enumeration budget of {max}")]
    EnumerationBudget { links: usize, max: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
