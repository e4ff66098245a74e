use thiserror::Error;

use crate::chain::Elem;

/// Errors produced by chain construction and the operations over chains.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("invalid chain: {0}")]
    Invariant(String),
    #[error("{elem} is not a member of {chain}")]
    NotAMember { chain: String, elem: String },
    #[error("chain {0} is not hereditarily finite")]
    NotFinite(String),
    #[error("duplicate key {0} in map element")]
    DuplicateKey(String),
    #[error("element is already nonzero at position {0}")]
    Overlap(String),
    #[error("selected one {0} is not above the designated zero")]
    BadOne(String),
    #[error("exponent chain has no last element")]
    NoLastElement,
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("not solvable: {0}")]
    NotSolvable(String),
    #[error("undecided: {0}")]
    Undecided(String),
    #[error("{elem} lies outside the segment {segment}")]
    WrongSegment { segment: String, elem: String },
    #[error("no omega-star tail witness for {0}")]
    NoTailWitness(String),
    #[error("refuter budget must be positive")]
    BudgetZero,
    #[error("check failed: {reason} ({left} vs {right})")]
    CheckFailed {
        reason: String,
        left: String,
        right: String,
    },
    #[error("operation expects {expected}, got {got}")]
    WrongShape { expected: &'static str, got: String },
}

impl ChainError {
    pub fn not_member(chain: &crate::chain::ChainDesc, elem: &Elem) -> Self {
        ChainError::NotAMember {
            chain: chain.to_string(),
            elem: elem.to_string(),
        }
    }

    /// Stable short code used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            ChainError::Invariant(_) => "E_INVARIANT",
            ChainError::NotAMember { .. } => "E_NOT_MEMBER",
            ChainError::NotFinite(_) => "E_NOT_FINITE",
            ChainError::DuplicateKey(_) => "E_DUPLICATE_KEY",
            ChainError::Overlap(_) => "E_OVERLAP",
            ChainError::BadOne(_) => "E_BAD_ONE",
            ChainError::NoLastElement => "E_NO_LAST",
            ChainError::HypothesisFailed(_) => "E_HYPOTHESIS",
            ChainError::NotSolvable(_) => "E_NOT_SOLVABLE",
            ChainError::Undecided(_) => "E_UNDECIDED",
            ChainError::WrongSegment { .. } => "E_WRONG_SEGMENT",
            ChainError::NoTailWitness(_) => "E_NO_TAIL",
            ChainError::BudgetZero => "E_BUDGET_ZERO",
            ChainError::CheckFailed { .. } => "E_CHECK_FAILED",
            ChainError::WrongShape { .. } => "E_WRONG_SHAPE",
        }
    }
}

pub type Result<T, E = ChainError> = std::result::Result<T, E>;
