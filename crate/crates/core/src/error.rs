use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("round {t}: action {action} is not feasible in state {state}")]
    InfeasibleAction { t: usize, state: String, action: String },
    #[error("policy collection is empty")]
    EmptyCollection,
    #[error("duplicate policy id `{0}`")]
    DuplicatePolicyId(String),
    #[error("reward lists have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("explicit valuation over {0} resources exceeds the enumeration cap of 20")]
    TooLargeExplicit(usize),
    #[error("resource {0} sold with no remaining inventory")]
    Oversell(u32),
    #[error("round {t}: emitted price for resource {resource} is not feasible")]
    InfeasiblePrice { t: usize, resource: u32 },
    #[error("resources {0} and {1} violate first-in-first-out departure order")]
    FifoViolation(u32, u32),
    #[error("oracle produced different actions on identical replays at round {0}")]
    NondeterministicOracle(usize),
    #[error("oracle reads full reward functions and cannot run under bandit feedback")]
    NotBanditApplicable,
    #[error("oracle is not declared stateless")]
    NotStateless,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("empty policy family specification")]
    EmptySpec,
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("slope fit failed: {0}")]
    SlopeFit(String),
    #[error("{path}:{line}:{column}: {message}")]
    Config { path: String, line: usize, column: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
