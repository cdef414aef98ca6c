//! Crate-wide error type.
//!
//! Every fallible operation returns [`Error`]; the variants carry the
//! numerical context (pivot magnitudes, spectral abscissas, offending
//! clusters) needed to act on a failure rather than just report it.

use std::fmt;

/// Row/column shape of a matrix operand, used in error reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape(pub usize, pub usize);

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.0, self.1)
    }
}

/// A single broken model invariant, produced by validation.
///
/// Violations are data, not errors: validation returns all of them at once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Which field is at fault (`"a"`, `"b"`, `"c"`, `"d"`, ...).
    pub field: String,
    /// Human-readable statement of the broken rule.
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{op}: incompatible shapes {left} and {right}")]
    ShapeMismatch {
        op: &'static str,
        left: Shape,
        right: Shape,
    },

    #[error("matrix is singular to working precision (pivot magnitude {pivot:.3e})")]
    SingularMatrix { pivot: f64 },

    #[error("matrix is not positive definite (offending value {value:.6e})")]
    NotPositiveDefinite { value: f64 },

    #[error("matrix is not symmetric (relative asymmetry {deviation:.3e})")]
    NotSymmetric { deviation: f64 },

    #[error("numerical failure in {context}")]
    NumericalFailure { context: String },

    #[error("system is not stable (spectral abscissa {abscissa:.6e})")]
    UnstableSystem { abscissa: f64 },

    #[error("resolvent is singular at omega = {omega:.6e} (resonance)")]
    Resonance { omega: f64 },

    #[error("no valid spectral gap at or below the requested order; clustered values {cluster:?}")]
    NoValidGap { cluster: Vec<f64> },

    #[error("invalid model: {}", format_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error("parse error in {context}: {detail}")]
    ParseError { context: String, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand used by kernels that hit an iteration cap or overflow.
    pub(crate) fn numerical(context: impl Into<String>) -> Self {
        Error::NumericalFailure {
            context: context.into(),
        }
    }
}
