//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("lambda must be finite, got {0}")]
    NonFiniteLambda(f64),

    #[error("{name} must be strictly positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} must be non-negative and finite, got {value}")]
    Negative { name: &'static str, value: f64 },

    #[error("the Cobb-Douglas form is only defined for growth (y > x), got x = {x}, y = {y}")]
    GrowthOnly { x: f64, y: f64 },

    #[error("reference pair ({x}, {y}) is stagnant, its indicator value is zero")]
    StagnantReference { x: f64, y: f64 },

    #[error("pair ({x}, {y}) is stagnant (x = y)")]
    StagnantPair { x: f64, y: f64 },

    #[error(
        "reference and comparison pairs share the past value {x} (or are too close to separate)"
    )]
    EqualPastValues { x: f64 },

    #[error("reference and comparison pairs change in opposite directions")]
    SignMismatch,

    #[error(
        "calibrated lambda {lambda} does not equate the two pairs (relative residual {residual:e})"
    )]
    CalibrationResidual { lambda: f64, residual: f64 },

    #[error("constructed pair ({x}, {y}) is not a valid positive pair")]
    InvalidConstructedPair { x: f64, y: f64 },

    #[error("the remainder bound is only asserted for lambda >= 0, got {0}")]
    NegativeLambda(f64),

    #[error("the marginal rate of substitution is undefined at lambda = 1")]
    LambdaIsOne,

    #[error("Taylor order must lie in [1, 64], got {0}")]
    InvalidOrder(u32),

    #[error("step size must be non-zero")]
    ZeroStep,

    #[error("{x} lies outside the domain of {function}")]
    OutOfDomain { function: String, x: f64 },

    #[error("{function}({x}) = {value} is not strictly positive")]
    NonPositiveValue {
        function: String,
        x: f64,
        value: f64,
    },

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("invalid function specification: {0}")]
    InvalidFunction(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("{message}")]
    Validation { message: String },
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonFiniteLambda(_) => "NonFiniteLambda",
            Error::NonPositive { .. } => "NonPositive",
            Error::Negative { .. } => "Negative",
            Error::GrowthOnly { .. } => "GrowthOnly",
            Error::StagnantReference { .. } => "StagnantReference",
            Error::StagnantPair { .. } => "StagnantPair",
            Error::EqualPastValues { .. } => "EqualPastValues",
            Error::SignMismatch => "SignMismatch",
            Error::CalibrationResidual { .. } => "CalibrationResidual",
            Error::InvalidConstructedPair { .. } => "InvalidConstructedPair",
            Error::NegativeLambda(_) => "NegativeLambda",
            Error::LambdaIsOne => "LambdaIsOne",
            Error::InvalidOrder(_) => "InvalidOrder",
            Error::ZeroStep => "ZeroStep",
            Error::OutOfDomain { .. } => "OutOfDomain",
            Error::NonPositiveValue { .. } => "NonPositiveValue",
            Error::InvalidRange(_) => "InvalidRange",
            Error::InvalidFunction(_) => "InvalidFunction",
            Error::Parse { .. } => "ParseError",
            Error::Validation { .. } => "ValidationError",
        }
    }

    /// True for errors that signal a numerical failure inside the library
    /// rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::CalibrationResidual { .. })
    }
}
