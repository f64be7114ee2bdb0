use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("observation {value:?} at index {index} is outside the {family} sample space")]
    Domain {
        family: &'static str,
        index: usize,
        value: Vec<f64>,
    },

    #[error("family mismatch: {0}")]
    FamilyMismatch(String),

    #[error("enumeration refused: {outcomes} outcomes exceed the cap of {cap}")]
    EnumerationCap { outcomes: String, cap: u64 },

    #[error("sample space of {0} is not finite; enumeration is unavailable")]
    NotEnumerable(&'static str),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("quadrature range [{lower}, {upper}] lies outside the declared parameter space {space}")]
    QuadratureOutsideSupport {
        lower: f64,
        upper: f64,
        space: String,
    },

    #[error("prior density at {theta:?} is zero; the constant term is undefined")]
    ZeroPriorDensity { theta: Vec<f64> },

    #[error("RiskSpec: {0}")]
    InvalidRiskSpec(String),

    #[error("observation has zero density under both hypotheses (index {index})")]
    ZeroUnderBoth { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}
