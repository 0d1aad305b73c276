use thiserror::Error;

/// Errors raised while constructing maps and systems.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("coefficients must be finite")]
    NonFinite,
    #[error("system has no maps")]
    NoMaps,
    #[error("cube side must be positive and finite, got {0}")]
    InvalidSide(f64),
    #[error("map {map} has Lipschitz bound {bound} >= 1; contraction constant would be {constant}")]
    ContractionViolation { map: usize, bound: f64, constant: f64 },
    #[error("map {map} sends the cube to coordinate {coord} range [{lo}, {hi}], outside [0, {side}]")]
    RangeViolation { map: usize, coord: usize, lo: f64, hi: f64, side: f64 },
    #[error("point coordinate {value} lies outside [0, {side}]")]
    PointOutsideCube { value: f64, side: f64 },
    #[error("lattice index {index} exceeds resolution {n}")]
    LatticeIndex { index: u64, n: u64 },
    #[error("lattice resolution {n} in dimension {dim} has too many cells")]
    LatticeTooLarge { n: u64, dim: usize },
}

/// Errors raised by the iteration algorithms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgoError {
    #[error("empty input set")]
    EmptyInput,
    #[error("tuple budget exceeded: step needs {count} evaluations, {budget} remain")]
    TupleBudgetExceeded { count: u128, budget: u64 },
    #[error("step {step}: measured gap {measured} exceeds bound {bound}")]
    VerificationFailure { step: usize, measured: f64, bound: f64 },
    #[error("expected {expected} argument sets, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// Errors raised while building grid schedules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("target error {eps} must lie in (0, {diameter})")]
    EpsilonTooLarge { eps: f64, diameter: f64 },
    #[error("contraction constant {0} must lie in (0, 1)")]
    DegenerateContraction(f64),
    #[error("invalid schedule: {0}")]
    Invalid(String),
}

/// Errors raised by the cost models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("deterministic cost needs order p >= 2, got {0}")]
    UnsupportedOrder(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Errors raised by distance computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("empty point set")]
    EmptySet,
    #[error("point sets have dimensions {0} and {1}")]
    DimensionMismatch(usize, usize),
}

/// Errors raised while reading or writing system definition files.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("{line}:{col}: expected {expected}")]
    Syntax { line: usize, col: usize, expected: String },
    #[error("invalid system")]
    Semantic(#[from] SystemError),
    #[error("unknown example {0:?} (expected A, B or C)")]
    UnknownExample(String),
}

/// Errors raised while rasterizing or writing images.
#[derive(Debug, Error)]
pub enum RenderError {
    #[error("axis {axis} out of range for dimension {dim}")]
    Axis { axis: usize, dim: usize },
    #[error("raster size must be at least 1x1, got {width}x{height}")]
    Size { width: usize, height: usize },
    #[error("malformed image: {0}")]
    Malformed(String),
    #[error("cannot write {path}: {source}")]
    Io { path: std::path::PathBuf, source: std::io::Error },
}
