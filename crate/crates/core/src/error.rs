use thiserror::Error;

/// Errors produced by word construction and the algorithms layered on top.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid letter: {0}")]
    InvalidLetter(String),
    #[error("invalid word: {0}")]
    InvalidWord(String),
    #[error("mixed alphabets: {0}")]
    MixedAlphabets(String),
    #[error("position does not exist in this word: {0}")]
    NoSuchPosition(String),
    #[error("budget of {budget} steps exhausted during {during}")]
    BudgetExhausted { budget: u64, during: String },
    #[error("numeric overflow during {0}")]
    Overflow(String),
    #[error("analysis inconclusive: {0}")]
    Inconclusive(String),
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal defect: {0}")]
    Defect(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
