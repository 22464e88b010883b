//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alpha is not a probability vector: {0}")]
    NonStochasticAlpha(String),
    #[error("pi is not symmetric at ({0},{1})")]
    AsymmetricPi(usize, usize),
    #[error("pi[{0}][{1}] = {2} lies outside [0,1]")]
    OutOfRangePi(usize, usize, f64),
    #[error("block count Q must be at least 1")]
    ZeroQ,
    #[error("need at least {needed} nodes, got {got}")]
    TooFewNodes { got: usize, needed: usize },
    #[error("degree {degree} exceeds n-1 = {max}")]
    DegreeOutOfRange { degree: u64, max: u64 },
    #[error("class count q = {q} exceeds n = {n}")]
    QTooLarge { q: usize, n: usize },
    #[error("conditional mean degrees of classes {0} and {1} coincide")]
    AssumptionAViolated(usize, usize),
    #[error("label {label} out of range for q = {q} classes")]
    LabelOutOfRange { label: usize, q: usize },
    #[error("beta = {0} lies outside (0,1)")]
    BetaOutOfRange(f64),
    #[error("member group of size {0} is too small")]
    GroupTooSmall(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("deviation t = {0} must be positive")]
    NonpositiveT(f64),
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("t = {0} lies outside (0, 1/4]")]
    TOutOfRange(f64),
    #[error("invalid edge ({i},{j}) for n = {n}: {reason}")]
    InvalidEdge { i: u64, j: u64, n: usize, reason: &'static str },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
}
