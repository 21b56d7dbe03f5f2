use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph must have at least one arm")]
    EmptyGraph,

    #[error("arm {arm} is out of range for a graph with {num_arms} arms")]
    ArmOutOfRange { arm: usize, num_arms: usize },

    #[error("arm {0} has no self-loop")]
    MissingSelfLoop(usize),

    #[error("graph is not strongly observable")]
    NotStronglyObservable,

    #[error("exact independence number is limited to {max} arms, got {num_arms}")]
    IndependenceBudget { num_arms: usize, max: usize },

    #[error("invalid graph spec `{0}`")]
    GraphSpec(String),

    #[error("invalid probability vector: {0}")]
    InvalidSimplex(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value: {0}")]
    NonFinite(&'static str),

    #[error("index out of range: {what} = {index}, limit {limit}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("invalid loss oracle: {0}")]
    Oracle(String),

    #[error("rounds out of order: expected round {expected}, got {actual}")]
    RoundOrder { expected: usize, actual: usize },

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("zero importance for revealed arm {arm} at round {round}")]
    ZeroImportance { arm: usize, round: usize },

    #[error("horizon {horizon} is not a multiple of epoch length {epoch_len}; nearest compliant horizon is {suggested}")]
    HorizonNotMultiple {
        horizon: usize,
        epoch_len: usize,
        suggested: usize,
    },

    #[error("invalid parameters: {0}")]
    Params(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("degenerate scaling fit: {0}")]
    Fit(String),

    #[error("run aborted at round {round}: {source}")]
    Run {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
