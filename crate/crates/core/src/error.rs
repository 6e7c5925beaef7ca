use core::fmt;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    InvalidParameter { name: &'static str, reason: &'static str },
    /// Two inputs disagree in shape (site count, truncation order, length).
    ShapeMismatch { expected: usize, found: usize, what: &'static str },
    /// A subset enumeration would exceed the configured size guard.
    SubsetBlowup { size: usize, limit: usize },
    /// Dense assembly requested above the dimension cap.
    DimensionCap { dim: usize, cap: usize },
    /// The requested time span lies beyond the guaranteed existence horizon.
    HorizonExceeded { requested: f64, horizon: f64 },
    /// Richardson comparison at half resolution disagrees beyond tolerance.
    QuadratureNonConvergence { estimate: f64, tolerance: f64 },
    /// A computed series term exceeds its majorant.
    MajorantViolation { term: usize, time: f64, norm: f64, majorant: f64 },
    /// The two internal oracle paths disagree.
    OracleDisagreement { difference: f64, tolerance: f64 },
    /// An adaptive or step-halving integrator could not make progress.
    StepCollapse { time: f64, step: f64 },
    /// A bracketing search failed to find a sign change.
    NoBracket { what: &'static str },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            Error::ShapeMismatch { expected, found, what } => {
                write!(f, "{what}: expected {expected}, found {found}")
            }
            Error::SubsetBlowup { size, limit } => {
                write!(f, "configuration of size {size} exceeds the subset guard {limit}")
            }
            Error::DimensionCap { dim, cap } => {
                write!(f, "dense dimension {dim} exceeds the cap {cap}")
            }
            Error::HorizonExceeded { requested, horizon } => {
                write!(f, "time span {requested} exceeds the horizon {horizon}")
            }
            Error::QuadratureNonConvergence { estimate, tolerance } => write!(
                f,
                "quadrature did not converge: Richardson estimate {estimate:e} > {tolerance:e}"
            ),
            Error::MajorantViolation { term, time, norm, majorant } => write!(
                f,
                "series term {term} at t={time} has norm {norm:e} above its majorant {majorant:e}"
            ),
            Error::OracleDisagreement { difference, tolerance } => write!(
                f,
                "oracle paths disagree by {difference:e} (tolerance {tolerance:e})"
            ),
            Error::StepCollapse { time, step } => {
                write!(f, "step size collapsed to {step:e} at t={time}")
            }
            Error::NoBracket { what } => write!(f, "no bracket found for {what}"),
        }
    }
}

impl core::error::Error for Error {}
