use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("singular matrix")]
    SingularMatrix,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("arity {0} exceeds the limit of {max}", max = crate::signature::MAX_ARITY)]
    ArityLimit(usize),
    #[error("bad signature: {0}")]
    BadSignature(String),
    #[error("slot {slot} out of range for arity {arity}")]
    SlotOutOfRange { slot: usize, arity: usize },
    #[error("self-loop needs two distinct slots, got {0} twice")]
    InvalidLoop(usize),
    #[error("not a permutation of 0..{0}")]
    InvalidPermutation(usize),
    #[error("zero signature")]
    ZeroSignature,
    #[error("expected arity {expected}, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid has dangling edges")]
    DanglingEdges,
    #[error("{edges} edges exceed the brute-force limit of {limit}")]
    EdgeLimit { edges: usize, limit: usize },
    #[error("intermediate tensor of arity {0} exceeds the contraction limit")]
    ContractionOverflow(usize),
    #[error("{0} dangling edges exceed the gadget limit")]
    TooManyDangling(usize),
    #[error("grid carries no bipartition")]
    NotBipartite,
    #[error("no entangling projection exists: {0}")]
    ExhaustionFailure(String),
    #[error("distance profile undefined: {0}")]
    ProfileUndefined(String),
    #[error("not in family: {0}")]
    NotInFamily(String),
    #[error("all triangle gadgets are degenerate")]
    AllDegenerate,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("matrix has rank {0}, full rank required")]
    RankDeficient(usize),
    #[error("wrong support shape: {0}")]
    WrongSupport(String),
    #[error("internal case gap: {0}")]
    InternalCaseGap(String),
}

pub type Result<T> = std::result::Result<T, Error>;
