use thiserror::Error;

/// Errors raised by the toolkit. Every message starts with the name of the
/// violated invariant so front ends can surface it verbatim.
#[derive(Debug, Error)]
pub enum Error {
    #[error("NotHermitian: max |M - M†| = {0:e}")]
    NotHermitian(f64),
    #[error("NotPositive: minimum eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("BadTrace: trace {0}")]
    BadTrace(f64),
    #[error("DimensionMismatch: {0}")]
    DimensionMismatch(String),
    #[error("NOutOfRange: noise level {0} outside [0, 1]")]
    NOutOfRange(f64),
    #[error("BadRank: {0}")]
    BadRank(String),
    #[error("NotComplete: max |Σ M†M - I| = {0:e}")]
    NotComplete(f64),
    #[error("UnrealizableClass: {0}")]
    UnrealizableClass(String),
    #[error("VerificationFailed: commutant blocks do not fix the state (residual {0:e})")]
    VerificationFailed(f64),
    #[error("SingularReference: {0}")]
    SingularReference(String),
    #[error("InfiniteRelativeEntropy: S(rho||tau) is infinite")]
    InfiniteRelativeEntropy,
    #[error("MessageOverflow: round {round} emits symbol {symbol} but message_dim is {message_dim}")]
    MessageOverflow { round: usize, symbol: usize, message_dim: usize },
    #[error("NotProductInput: {0}")]
    NotProductInput(String),
    #[error("InvalidProtocol: {0}")]
    InvalidProtocol(String),
    #[error("InvalidInput: {0}")]
    InvalidInput(String),
    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
    #[error("Parse: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
