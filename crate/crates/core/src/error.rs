use thiserror::Error;

/// Errors raised by lattice construction, operator application and probes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DyadError {
    #[error("dimension {0} is not supported (expected 1 or 2)")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate lattice: finest scale {fine} is coarser than top scale {top}")]
    DegenerateLattice { fine: i32, top: i32 },

    #[error("lattice budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("value {0} is not finite")]
    NonFinite(f64),

    #[error("exponent must be positive, got {0}")]
    NonPositiveExponent(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("scale mismatch: {0}")]
    ScaleMismatch(String),

    #[error("window mismatch: {0}")]
    WindowMismatch(String),

    #[error("translation by {0} needs more than {1} refinement levels")]
    RefinementBudget(f64, u32),

    #[error("Haar pattern is not cancellative (sum of weighted coefficients {0})")]
    NotCancellative(f64),

    #[error("the all-ones alpha vector is not allowed for this operator")]
    AllOnesAlpha,

    #[error("arity mismatch: operator takes {expected} inputs, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("slot index {index} out of range 1..={arity}")]
    SlotOutOfRange { index: usize, arity: usize },

    #[error("shift term violates geometry: {0}")]
    ShiftGeometry(String),

    #[error("shift term violates normalization: |lambda| * |h'| * |h''| = {0} > 1")]
    ShiftNormalization(f64),

    #[error("depth violation: {0}")]
    DepthViolation(String),

    #[error("operation requires d = 1")]
    RequiresOneDimension,

    #[error("weight must be strictly positive on the window")]
    NonPositiveWeight,

    #[error("negative argument {0}")]
    NegativeArgument(f64),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("no qualifying interval: {0}")]
    NoQualifyingInterval(String),

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("sample point lies on a dyadic boundary: {0}")]
    DyadicSamplePoint(String),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
}

pub type Result<T> = std::result::Result<T, DyadError>;
