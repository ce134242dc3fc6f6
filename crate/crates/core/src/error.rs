use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tuple {tuple:?} repeats an index; kernels vanish on diagonals")]
    RepeatedIndex { tuple: Vec<u32> },
    #[error("tuple {tuple:?} appears twice after canonicalization")]
    DuplicateEntry { tuple: Vec<u32> },
    #[error("index {index} outside [1, {size}]")]
    IndexOutOfRange { index: u32, size: usize },
    #[error("tuple {tuple:?} has {got} components, expected {expected}")]
    TupleArity {
        tuple: Vec<u32>,
        expected: usize,
        got: usize,
    },
    #[error("non-finite kernel value {value} at {tuple:?}")]
    NonFiniteValue { tuple: Vec<u32>, value: f64 },
    #[error("order {order} outside the supported range [{min}, {max}]")]
    OrderOutOfRange {
        order: usize,
        min: usize,
        max: usize,
    },
    #[error("size {size} outside the supported range [1, {max}]")]
    SizeOutOfRange { size: usize, max: usize },
    #[error("intensity λ_{index} = {value} must be finite and positive")]
    InvalidWeight { index: usize, value: f64 },
    #[error("weight vector is empty")]
    EmptyWeights,
    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("kernel size {size} exceeds weight vector length {weights}")]
    WeightLengthMismatch { size: usize, weights: usize },
    #[error("power {0} not supported (expected 1..=8)")]
    InvalidPower(u32),
    #[error("invalid contraction indices r={r}, l={l} for orders {p} and {q}")]
    InvalidContractionIndices {
        r: usize,
        l: usize,
        p: usize,
        q: usize,
    },
    #[error("target order {k} outside [{min}, {max}]")]
    InvalidOrder { k: usize, min: usize, max: usize },
    #[error("order {order} too small (need at least {min})")]
    OrderTooSmall { order: usize, min: usize },
    #[error("moment order {order} exceeds the maximum {max}")]
    OrderTooLarge { order: usize, max: usize },
    #[error("custom moment table has no entry for order {0}")]
    MissingCustomMoment(usize),
    #[error("invalid custom moment table: {0}")]
    InvalidCustomMoments(String),
    #[error("expansion needs {needed} terms, budget is {budget}")]
    BudgetExceeded { needed: f64, budget: f64 },
    #[error("provider {0} has no sampler")]
    UnsupportedSampler(String),
    #[error("sample width {width} smaller than kernel size {size}")]
    WidthMismatch { width: usize, size: usize },
    #[error("argument {0} outside the domain")]
    DomainError(f64),
    #[error("need at least 2 samples, got {0}")]
    InsufficientSamples(usize),
    #[error("variance must be positive, got {0}")]
    NonpositiveVariance(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("fourth moment routes disagree: {left} vs {right}")]
    OracleMismatch { left: f64, right: f64 },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    /// Budget and numerical failures, as opposed to bad input.
    pub fn is_runtime(&self) -> bool {
        matches!(
            self,
            Error::BudgetExceeded { .. } | Error::OracleMismatch { .. }
        )
    }
}
