use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("disturbance {value:?} lies outside the disturbance set")]
    DisturbanceOutsideSet { value: Vec<f64> },

    #[error("disturbance set does not contain the origin")]
    DisturbanceSetMissingOrigin,

    #[error("vector field does not vanish at the origin (|f(0,0)| = {residual})")]
    NonZeroEquilibrium { residual: f64 },

    #[error("analytic jacobian disagrees with finite differences at {point:?} (error {error})")]
    JacobianMismatch { point: Vec<f64>, error: f64 },

    #[error("non-finite state at t = {time}")]
    NonFiniteState { time: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("step {step} does not divide horizon {horizon}")]
    StepDoesNotDivide { step: f64, horizon: f64 },

    #[error("cover cardinality {cardinality:e} exceeds cap {cap}")]
    CoverTooFine { cardinality: f64, cap: u64 },

    #[error("cover index {index} out of range for cardinality {cardinality}")]
    CorruptMessage { index: u64, cardinality: u64 },

    #[error("measurement {value:?} lies outside the initial set")]
    MeasurementOutsideInitialSet { value: Vec<f64> },

    #[error("time {time} is outside frame {frame}")]
    TimeOutsideFrame { time: f64, frame: u64 },

    #[error("{0} requires a decay rate alpha")]
    MissingAlpha(&'static str),

    #[error("wire record has {0} bytes, expected 12")]
    BadRecordLength(usize),

    #[error("unknown benchmark `{0}`")]
    UnknownBenchmark(String),

    #[error("estimator used before initialisation")]
    NotInitialised,

    #[error("expected frame {expected}, received frame {received}")]
    UnexpectedFrame { expected: u32, received: u32 },

    #[error("encoder and decoder disagree at frame {frame}")]
    Desync { frame: u32 },
}
