use thiserror::Error;

use crate::engine::{Edge, Player};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("enumeration indices start at 1")]
    ZeroIndex,
    #[error("cannot parse rational {0:?}")]
    Parse(String),
    #[error("{0} is outside the enumerated range")]
    OutOfRange(Rational),
    #[error("enumeration index of {0} does not fit in 64 bits")]
    IndexOverflow(Rational),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("{0} is not in the open unit interval")]
    OutsideUnitInterval(Rational),
    #[error("back-and-forth step budget of {limit} exhausted")]
    StepBudget { limit: u64 },
    #[error("class scan budget of {limit} codomain elements exhausted")]
    ScanBudget { limit: u64 },
    #[error("expected {lower} < {upper}")]
    NotIncreasing { lower: Box<Rational>, upper: Box<Rational> },
    #[error(transparent)]
    Rational(#[from] RationalError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("turn {turn}: edge {edge} already claimed at turn {claimed_at}")]
    AlreadyClaimed { turn: u64, edge: Box<Edge>, claimed_at: u64 },
    #[error("turn {turn}: {got} moved but it is {expected}'s turn")]
    OutOfTurn { turn: u64, expected: Player, got: Player },
    #[error("edge endpoints must be distinct, got {0} twice")]
    Loop(Rational),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("illegal move: {0}")]
    Illegal(#[from] EngineError),
    #[error("trace header declares {found:?}, expected {expected:?}")]
    HeaderMismatch { expected: String, found: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("{strategy}: {reason}")]
    Precondition { strategy: String, reason: String },
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("unknown strategy identifier {0:?}")]
    UnknownId(String),
}
