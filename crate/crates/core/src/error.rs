use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("invalid step density: {0}")]
    InvalidStepDensity(String),

    #[error("invalid interval [{a}, {b}]: {reason}")]
    InvalidInterval { a: f64, b: f64, reason: String },

    #[error("density is not non-increasing near x = {at}")]
    ShapeViolation { at: f64 },

    #[error("f(0) = {value} exceeds the declared bound M = {bound}")]
    BoundViolation { value: f64, bound: f64 },

    #[error("datum {value} lies outside the support (0, {bound}]")]
    Domain { value: f64, bound: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("scale c_n n^(-1/3) = {shift} is not below the support bound {bound}")]
    DegenerateScale { shift: f64, bound: f64 },

    #[error("every loss in the sample is infinite")]
    AllInfinite,

    #[error("partition did not reach the stopping rule within {0} refinement steps")]
    PartitionDidNotConverge(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
