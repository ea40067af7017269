use thiserror::Error;

/// Everything that can go wrong while building or analysing a family.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("ground set size {0} exceeds the limit of {max}", max = crate::ground::MAX_N)]
    GroundTooLarge(usize),
    #[error("element {element} out of range 1..={n}")]
    ElementOutOfRange { element: usize, n: usize },
    #[error("wrong cardinality: expected {expected} distinct elements, got {got}")]
    WrongCardinality { expected: usize, got: usize },
    #[error("expected {expected} sets, got {got}")]
    WrongSetCount { expected: usize, got: usize },
    #[error("duplicate set {0}")]
    DuplicateSet(String),
    #[error("set {0} is not a member of the family")]
    NotMember(String),
    #[error("families are over different ground parameters")]
    ShapeMismatch,
    #[error("F* is not a subfamily of F: {0} is missing from F")]
    NotSubfamily(String),
    #[error("binomial coefficient C({0}, {1}) overflows")]
    Overflow(u64, u64),
    #[error("resource guard: {0}")]
    ResourceGuard(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("family is not extremal: {0}")]
    NotExtremal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
