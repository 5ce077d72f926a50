use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} exceeds cap ({actual} > {cap})")]
    CapExceeded {
        what: &'static str,
        cap: usize,
        actual: usize,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("graph is not certified to have highway dimension 1 (scale {0})")]
    NotCertified(String),

    #[error("decomposition width {width} exceeds the DP budget of {budget}")]
    BudgetExceeded { width: usize, budget: usize },

    #[error("generator gave up after {0} attempts")]
    RetriesExhausted(usize),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
