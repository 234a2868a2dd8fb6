use thiserror::Error;

use crate::channel::ConditionWitness;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse {input:?}: {message}")]
    Parse { input: String, message: String },

    #[error("missing assignment for generator {0}")]
    MissingAssignment(String),

    #[error("support not distinct: {0} appears more than once")]
    SupportNotDistinct(String),

    #[error("empty support")]
    EmptySupport,

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("degenerate scaling: scale factor is zero")]
    DegenerateScaling,

    #[error("degenerate combination: every coefficient is zero")]
    DegenerateCombination,

    #[error("atom budget exceeded: more than {budget} atoms")]
    BudgetExceeded { budget: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("condition (*) violated for user {} at degree {}", .0.user, .0.degree)]
    ConditionViolated(Box<ConditionWitness>),

    #[error("channel is not fully connected")]
    NotFullyConnected,

    #[error("deterministic inputs: denominator entropy is zero")]
    DeterministicInputs,

    #[error("requires ordered rationals: {0} is symbolic")]
    RequiresOrderedRationals(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable code, used by the CLI error object.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::MissingAssignment(_) => "missing-assignment",
            Error::SupportNotDistinct(_) => "support-not-distinct",
            Error::EmptySupport => "empty-support",
            Error::InvalidProbabilities(_) => "invalid-probabilities",
            Error::DegenerateScaling => "degenerate-scaling",
            Error::DegenerateCombination => "degenerate-combination",
            Error::BudgetExceeded { .. } => "budget-exceeded",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::ConditionViolated(_) => "condition-violated",
            Error::NotFullyConnected => "not-fully-connected",
            Error::DeterministicInputs => "deterministic-inputs",
            Error::RequiresOrderedRationals(_) => "requires-ordered-rationals",
            Error::Json(_) => "json",
        }
    }
}
