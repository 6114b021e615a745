use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid lattice specification: {0}")]
    InvalidSpec(String),
    #[error("tree is not a spanning acyclic edge set: {0}")]
    TreeInvalid(String),
    #[error("unknown link id {0}")]
    LinkUnknown(usize),
    #[error("rod index {rod} outside 1..={n_rods}")]
    RodUnknown { rod: usize, n_rods: usize },
    #[error("rods 1 and 2 (or a rod and the frame axis) are collinear: sin = {0:e}")]
    FrameDegenerate(f64),
    #[error("ladder index (dl = {dl}, dm = {dm}) is not defined")]
    InvalidLadder { dl: i32, dm: i32 },
    #[error("invalid quantum number: {0}")]
    InvalidQuantumNumber(String),
    #[error("radial coordinate {0} is at a chart endpoint")]
    RadialSingularity(f64),
    #[error("sector is empty: {0}")]
    SectorEmpty(String),
    #[error("operator {op} is unavailable with {n_rods} rods")]
    OperatorUnavailable { op: String, n_rods: usize },
    #[error("loop word of length {0} is not supported (max 4)")]
    UnsupportedLoop(usize),
    #[error("matrix too large: {needed} nonzeros exceeds the limit {limit}")]
    TooLarge { needed: usize, limit: usize },
    #[error("eigensolver failed to converge: residual {residual:e}")]
    SpectrumFailed { residual: f64 },
    #[error("Richardson extrapolation unreliable: {0}")]
    ExtrapolationUnreliable(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

pub type Result<T> = std::result::Result<T, Error>;
