use thiserror::Error;

/// Errors produced by the fitting, tuning and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or inconsistent input (shapes, non-finite values, empty grids).
    #[error("invalid input: {0}")]
    Validation(String),

    /// A column that cannot be updated: zero norm with no ridge term and no l1 weight.
    #[error("degenerate column {column}: zero norm with lambda2 = 0 and zero l1 weight")]
    DegenerateColumn { column: usize },

    /// A parameter outside the admissible domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A Monte Carlo replication failed; carries the seed needed to rerun it.
    #[error("replication {replication} (base seed {seed}) failed: {source}")]
    Replication {
        replication: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
