use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("d must be a positive integer, got 0")]
    ZeroD,
    #[error("{0} is not square-free")]
    NotSquarefree(u64),
    #[error("{name} = {value} is not an odd prime")]
    NotOddPrime { name: &'static str, value: u64 },
    #[error("p and q must be distinct, both are {0}")]
    EqualPrimes(u64),
    #[error("k = {0} must be odd and positive")]
    EvenIndex(u32),
    #[error("{0}")]
    InvalidInstance(String),
    #[error("invalid Lehmer pair: {0}")]
    InvalidPair(crate::lehmer::PairDefect),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("hypothesis gate refused: {0}")]
    HypothesisRefused(String),
    #[error("internal assertion failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
