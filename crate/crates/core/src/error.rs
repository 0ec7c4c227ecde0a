use thiserror::Error;

/// Errors raised by the model, solver and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("target mean {target} outside open interval ({min}, {max})")]
    OutOfRange { target: f64, min: f64, max: f64 },
    #[error("all durations are equal; the mean-duration constraint does not determine beta")]
    DegenerateConstraint,
    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    #[error("floating-point overflow in {0}")]
    NumericOverflow(&'static str),
    #[error("support mismatch: q is zero where p is positive (index {0})")]
    SupportMismatch(usize),
    #[error("log Z >= 0: receiver free energy never crosses zero from above")]
    NoCriticalVelocity,
    #[error("required divergence -ln Z exceeds its supremum S")]
    UnreachableThreshold,
    #[error("receiver free energy does not change sign on the search interval")]
    NoCrossing,
    #[error("no single scale factor explains all observed durations")]
    InconsistentObservations,
    #[error("likelihood maximum lies on the edge of the search bracket")]
    BracketFailure,
    #[error("this quantity needs an explicit codebook, not figure mode")]
    CodebookRequired,
}

impl Error {
    /// Variant name, used where the command line prints an error in place of a value.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::DegenerateConstraint => "DegenerateConstraint",
            Error::DivisionByZero(_) => "DivisionByZero",
            Error::OutOfDomain(_) => "OutOfDomain",
            Error::NumericOverflow(_) => "NumericOverflow",
            Error::SupportMismatch(_) => "SupportMismatch",
            Error::NoCriticalVelocity => "NoCriticalVelocity",
            Error::UnreachableThreshold => "UnreachableThreshold",
            Error::NoCrossing => "NoCrossing",
            Error::InconsistentObservations => "InconsistentObservations",
            Error::BracketFailure => "BracketFailure",
            Error::CodebookRequired => "CodebookRequired",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn finite_or_overflow(x: f64, what: &'static str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NumericOverflow(what))
    }
}
