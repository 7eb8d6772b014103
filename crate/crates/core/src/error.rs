use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid group spec: {0}")]
    InvalidGroup(String),
    #[error("group is not bracket-generating: brackets of weight-1 axes span rank {rank} < {m2}")]
    NotBracketGenerating { rank: usize, m2: usize },
    #[error("invalid weight table: {0}")]
    InvalidWeights(String),
    #[error("points belong to different groups ({0} vs {1})")]
    GroupMismatch(String, String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("scale mismatch: {0}")]
    ScaleMismatch(String),
    #[error("boundary of a 0-chain is undefined")]
    BoundaryOfVertex,
    #[error("cannot subdivide a scale-0 chain")]
    SubdivideBaseScale,
    #[error("input is not a cycle")]
    NotACycle,
    #[error("chain support escapes the box {0}")]
    SupportEscapesBox(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("plan rejected: {0}")]
    PlanRejected(String),
    #[error("residual cycle did not vanish by scale {scale} (l1 = {l1})")]
    ResidualNonzero { scale: u32, l1: u64 },
    #[error("no filling inside the window: {0}")]
    NoFillingInWindow(String),
    #[error("window too large: {vars} LP variables exceeds cap {cap}")]
    WindowTooLarge { vars: usize, cap: usize },
    #[error("LP solver failure: {0}")]
    Lp(String),
    #[error("need at least 3 points for an exponent fit, got {0}")]
    TooFewPoints(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
