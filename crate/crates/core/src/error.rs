use thiserror::Error;

use crate::constraints::RejectedConstraint;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A problem reported index `index` as forbidden but its advance value
    /// does not move past the current component.
    #[error("problem contract violated at index {index}: advance {advance} does not exceed current value {current}")]
    ProblemContractViolation {
        index: usize,
        current: String,
        advance: String,
    },

    #[error("brute-force domain has {points} points, limit is {limit}")]
    DomainTooLarge { points: u128, limit: u128 },

    #[error("precedence edges form a cycle through event (man {man}, rank {rank})")]
    CyclicPrecedence { man: usize, rank: u32 },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error(transparent)]
    RejectedConstraint(#[from] RejectedConstraint),

    #[error("vertices unreachable from the source: {unreachable:?}")]
    UnreachableVertex {
        unreachable: Vec<usize>,
        partial: Vec<Option<f64>>,
    },

    #[error("slice event space has {events} events, limit is {limit}")]
    EventSpaceTooLarge { events: u64, limit: u64 },

    #[error("{count} solutions exceed the enumeration limit of {limit}")]
    TooManySolutions { count: u128, limit: usize },

    #[error("instance too large for brute force: {0}")]
    TooLarge(String),
}

impl Error {
    /// Stable machine-readable code, used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ProblemContractViolation { .. } => "problem_contract_violation",
            Error::DomainTooLarge { .. } => "domain_too_large",
            Error::CyclicPrecedence { .. } => "cyclic_precedence",
            Error::InvalidInstance(_) => "invalid_instance",
            Error::RejectedConstraint(_) => "rejected_constraint",
            Error::UnreachableVertex { .. } => "unreachable_vertex",
            Error::EventSpaceTooLarge { .. } => "event_space_too_large",
            Error::TooManySolutions { .. } => "too_many_solutions",
            Error::TooLarge(_) => "too_large",
        }
    }
}
