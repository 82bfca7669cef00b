//! Crate-wide error type.

use thiserror::Error;

use crate::padic::PadicError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("epsilon factor needs a ramified character")]
    Unramified,
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("w-action undefined for p = 2 with c = {c} = 2·{level}")]
    ExceptionalKirillov { c: u32, level: u32 },
    #[error("no epsilon datum stored for a character of level {0}")]
    MissingEpsilon(u32),
    #[error("shell sums did not settle into the expected geometric tail: {0}")]
    TailNotLocked(String),
    #[error("integrand is not invariant: {0}")]
    NotInvariant(String),
    #[error("integrand is not locally constant at depth {0}")]
    DepthInsufficient(u32),
}

pub type Result<T> = std::result::Result<T, Error>;
