use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("map {index} leaves the root region by {excess:.3e}")]
    ContainmentViolation { index: usize, excess: f64 },

    #[error("all maps of a system must share one shape and one ratio ({0})")]
    MixedShapes(String),

    #[error("a similarity system needs at least one map")]
    EmptySystem,

    #[error("unknown preset `{0}` (expected gasket, corner4 or random-<L>-<seed>)")]
    UnknownPreset(String),

    #[error("enumeration of {requested} pieces exceeds the cap of {cap}")]
    EnumerationCapExceeded { requested: u128, cap: u64 },

    #[error("quadrature did not reach the target error: value {value}, last refinement difference {error_estimate}")]
    NoConvergence { value: f64, error_estimate: f64 },

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("invalid product split: {0}")]
    SpecInvalid(String),

    #[error("contour passes through a zero after {attempts} jitter attempts")]
    ContourThroughZero { attempts: usize },

    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),

    #[error("delta {0} outside (0, 1/3)")]
    DeltaOutOfRange(f64),

    #[error("system has no two independent generator differences; no slope form exists")]
    DegenerateSystem,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl Error {
    /// Stable snake_case name of the variant, for machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ContainmentViolation { .. } => "containment_violation",
            Error::MixedShapes(_) => "mixed_shapes",
            Error::EmptySystem => "empty_system",
            Error::UnknownPreset(_) => "unknown_preset",
            Error::EnumerationCapExceeded { .. } => "enumeration_cap_exceeded",
            Error::NoConvergence { .. } => "no_convergence",
            Error::DegenerateSeries(_) => "degenerate_series",
            Error::SpecInvalid(_) => "spec_invalid",
            Error::ContourThroughZero { .. } => "contour_through_zero",
            Error::PreconditionUnmet(_) => "precondition_unmet",
            Error::DeltaOutOfRange(_) => "delta_out_of_range",
            Error::DegenerateSystem => "degenerate_system",
            Error::InvalidInput(_) => "invalid_input",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}
