//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Errors produced by state construction, program parsing and execution,
/// and the numeric routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A coherent label left the harmonic region guard `|alpha| <= alpha_max`.
    LabelOutOfRange { alpha_abs: f64, alpha_max: f64 },
    /// An amplitude or label stopped being finite.
    NonFinite,
    /// Asked for an observable of a state with vanishing norm.
    ZeroNormState,
    /// Pulse-program syntax error with 1-based line and column.
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    /// A program referenced a scan variable that was not bound.
    UnboundVariable { name: &'static str, line: usize },
    /// Executed a WAIT with a negative angle.
    NegativeWait { line: usize },
    /// Invalid builder or observable argument.
    InvalidArgument(String),
    /// Thermal quadrature did not converge to the requested tolerance.
    QuadratureNotConverged { delta: f64, tol: f64 },
    /// Unknown preset name.
    UnknownPreset(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::LabelOutOfRange {
                alpha_abs,
                alpha_max,
            } => write!(
                f,
                "coherent label |alpha| = {alpha_abs:.3e} exceeds guard {alpha_max:.3e}"
            ),
            Error::NonFinite => write!(f, "non-finite amplitude or label"),
            Error::ZeroNormState => write!(f, "state has zero norm"),
            Error::Parse { line, col, msg } => {
                write!(f, "parse error at line {line}, column {col}: {msg}")
            }
            Error::UnboundVariable { name, line } => {
                write!(f, "unbound variable `{name}` at line {line}")
            }
            Error::NegativeWait { line } => {
                write!(f, "negative WAIT angle at line {line}")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::QuadratureNotConverged { delta, tol } => write!(
                f,
                "thermal quadrature not converged: node doubling moved the result by \
                 {delta:.3e} (tolerance {tol:.3e})"
            ),
            Error::UnknownPreset(name) => write!(f, "unknown preset `{name}`"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
