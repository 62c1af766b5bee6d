use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("instance has no agents")]
    EmptyInstance,
    #[error("non-finite value in input: {0}")]
    NonFiniteValue(String),
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("{n} agents cannot be split into blocks of {k}")]
    NotDivisible { n: usize, k: usize },
    #[error("invalid placement: {0}")]
    InvalidPlacement(String),
    #[error("infeasible capacities: {0}")]
    InfeasibleCapacities(String),
    #[error("instance too large for exhaustive search: n = {n} > {cap}")]
    InstanceTooLarge { n: usize, cap: usize },
    #[error("{0}")]
    WrongParity(String),
    #[error("capacity overflow at facility {facility}: load {load} > capacity {capacity}")]
    CapacityOverflow { facility: usize, load: usize, capacity: usize },
    #[error("mechanism precondition violated: {0}")]
    MechanismPreconditionViolated(String),
    #[error("search budget exceeded after {evaluations} evaluations")]
    SearchBudgetExceeded { evaluations: u64 },
    #[error("invalid class: {0}")]
    InvalidClass(String),
    #[error("parse error: {0}")]
    Parse(String),
}
