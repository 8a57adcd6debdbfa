use core::fmt;

/// Errors raised by grid construction, configuration validation and the
/// serial solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid side below 3 leaves no interior cell.
    GridTooSmall { n: usize },
    /// A value that must be finite was NaN or infinite.
    NonFinite { what: &'static str },
    /// Backing storage does not hold `n * n` values.
    LengthMismatch { expected: usize, actual: usize },
    /// Two grids of different sides were compared.
    DimensionMismatch { left: usize, right: usize },
    InvalidOmega(f64),
    InvalidEpsilon(f64),
    ZeroMaxIterations,
    InvalidCheckInterval {
        check_interval: usize,
        max_iterations: usize,
    },
    ZeroWorkers,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::GridTooSmall { n } => {
                write!(f, "grid side must be at least 3 (got {n})")
            }
            Error::NonFinite { what } => write!(f, "{what} must be finite"),
            Error::LengthMismatch { expected, actual } => {
                write!(f, "expected {expected} grid values, got {actual}")
            }
            Error::DimensionMismatch { left, right } => {
                write!(f, "grid sides differ ({left} vs {right})")
            }
            Error::InvalidOmega(w) => {
                write!(f, "omega must lie strictly between 0 and 2 (got {w})")
            }
            Error::InvalidEpsilon(e) => {
                write!(f, "epsilon must be positive and finite (got {e})")
            }
            Error::ZeroMaxIterations => f.write_str("max iterations must be at least 1"),
            Error::InvalidCheckInterval {
                check_interval,
                max_iterations,
            } => write!(
                f,
                "check interval must be in 1..={max_iterations} (got {check_interval})"
            ),
            Error::ZeroWorkers => f.write_str("worker count must be at least 1"),
        }
    }
}

impl core::error::Error for Error {}
