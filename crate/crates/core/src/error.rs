use thiserror::Error;

/// Errors raised while reading an instance file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty instance text")]
    Empty,
    #[error("line {line}: {what}: expected {expected} fields")]
    FieldCount {
        line: usize,
        what: String,
        expected: usize,
    },
    #[error("expected {expected} item rows, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BkpError {
    #[error("item vectors differ in length (p: {profits}, w: {weights}, v: {leader_weights})")]
    LengthMismatch {
        profits: usize,
        weights: usize,
        leader_weights: usize,
    },
    #[error("instance is not well posed: {0}")]
    IllPosed(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("instance generation failed after {attempts} attempts: {reason}")]
    Generation { attempts: u32, reason: String },
    #[error("brute force refused: n = {n} exceeds the limit of {limit} items")]
    TooLarge { n: usize, limit: usize },
    #[error("unknown variable {0}")]
    UnknownVariable(usize),
    #[error("MILP engine failure: {0}")]
    Engine(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T> = std::result::Result<T, BkpError>;
