use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    Structure(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("triple ({0}, {1}, {2}) is not admissible at level {3}")]
    NotAdmissible(u32, u32, u32, u32),

    #[error("labeling is not a member of L_k: {0}")]
    NotMember(String),

    #[error("outside the domain: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("step budget exceeded: {0}")]
    StepBudget(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("tolerance check failed: {0}")]
    Tolerance(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical procedure (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepBudget(_) | Error::Convergence(_) | Error::Tolerance(_)
        )
    }
}
