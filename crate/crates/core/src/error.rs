use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected order {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry produced while {0}")]
    OverflowDetected(&'static str),

    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    ConvergenceFailure { iterations: usize },

    #[error("numeric ambiguity: {0}")]
    NumericAmbiguity(String),

    #[error("core-nilpotent similarity is ill-conditioned (estimate {estimate:.3e} > bound {bound:.3e})")]
    IllConditioned { estimate: f64, bound: f64 },

    #[error("witness exponent {lcm} exceeds the verification limit {limit}")]
    WitnessOverflow { lcm: u64, limit: u64 },

    #[error("word length {k} exceeds the enumeration bound {max}")]
    KTooLarge { k: usize, max: usize },

    #[error("similarity rejected: condition estimate {estimate:.3e} above bound {bound:.3e}")]
    ConditioningRejected { estimate: f64, bound: f64 },

    #[error("generator failed: {0}")]
    GeneratorFailure(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid tolerances: {0}")]
    InvalidTolerances(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Errors that signal a tolerance breakdown rather than a wrong answer.
    pub fn is_inconclusive(&self) -> bool {
        matches!(
            self,
            Error::NumericAmbiguity(_)
                | Error::WitnessOverflow { .. }
                | Error::ConvergenceFailure { .. }
                | Error::IllConditioned { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
