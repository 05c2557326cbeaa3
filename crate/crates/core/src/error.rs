use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("n must exceed 10 (got {0})")]
    InvalidN(u32),
    #[error("k must be between 2 and 31 (got {0})")]
    InvalidK(usize),
    #[error("descent constant unreachable: a = {a} < d = {d}")]
    DescentUnreachable { a: f64, d: f64 },
    #[error("point {value} outside the domain [-1, 2]")]
    OutOfDomain { value: f64 },
    #[error("value {value} not in the range of the map")]
    NotInRange { value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("symbol {0:#b} has bits above k")]
    BadSymbol(u32),
    #[error("index {index} out of range for region {region}")]
    RegionIndex { region: &'static str, index: u32 },
    #[error("invalid hat knots: {0}")]
    InvalidHat(String),
    #[error("orbit left Q+ at time {time}: {point:?}")]
    Escape { time: u64, point: Vec<f64> },
    #[error("insertions overlap at position {0}")]
    Overlap(usize),
    #[error("insertion at {position} of length {len} exceeds sequence length {length}")]
    OutOfBounds { position: usize, len: usize, length: usize },
    #[error("robust coverage fails: margin {margin}")]
    CoverageFails { margin: f64 },
    #[error("target {0:?} is outside Q-")]
    TargetOutsideQminus(Vec<f64>),
    #[error("target {0:?} is outside K")]
    TargetOutsideK(Vec<f64>),
    #[error("search cap of {0} steps exceeded")]
    SearchCap(usize),
    #[error("word length cap of {0} letters exceeded")]
    WordCap(usize),
    #[error("perturbation could not be certified after {0} retries")]
    PerturbationRetries(usize),
    #[error("this construction needs k = 2 (got {0})")]
    WordDimension(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
