//! Error types shared across the crate.
//!
//! Every fallible operation returns [`Error`]; the variants are deliberately
//! fine-grained so callers (and the CLI) can distinguish structural problems
//! in the input from genuine degeneracies of the algebraic machinery.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Division by an exactly-zero scalar.
    #[error("division by zero scalar")]
    DivisionByZero,

    /// A complex vector field is not in the real span of the P/R generators.
    ///
    /// Carries the offending monomial (canonical text) and the reason.
    #[error("not in the P/R span: {monomial}: {reason}")]
    NotInSpan { monomial: String, reason: String },

    /// The linear part of a complex field differs from the pure rotation
    /// prescribed by the two frequency symbols.
    #[error("linear part mismatch: {0}")]
    BadLinearPart(String),

    /// The coefficient pairing required of a real field in complex
    /// coordinates fails at the reported monomial.
    #[error("reality pairing violated at {0}")]
    RealityViolation(String),

    /// A resonant coefficient that must be a plain rational after
    /// first-level reduction still depends on the frequencies (or has an
    /// imaginary part).
    #[error("resonant coefficient not rational at {0}")]
    PostRationalityCheck(String),

    /// A graded operation was asked for a grade below its domain.
    #[error("grade {got} too small (minimum {min})")]
    GradeTooSmall { got: u32, min: u32 },

    /// A 4x4 block that a block recursion must invert is singular.
    #[error("singular block at column group {group} ({role})")]
    SingularBlock { group: usize, role: String },

    /// A structured solve could not be completed deterministically: the
    /// pivot set found by the plan does not span the full row space.
    #[error("solve under-determined: {0}")]
    NonUniqueSolve(String),

    /// All four cubic normal-form coefficients vanish, so no case applies.
    #[error("degenerate cubic part: all four leading coefficients vanish")]
    DegenerateCubic,

    /// The coefficient pattern falls outside every tabulated branch, so no
    /// closed-form complement is available.
    #[error("no tabulated complement for branch {0}")]
    UncoveredCase(String),

    /// A higher-level generator tuple fails its kernel certificate.
    #[error("kernel certificate failed: {0}")]
    KernelViolation(String),

    /// Input text (scalar expression or JSON document) failed to parse.
    /// `path` locates the failure (JSON path or character position).
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Builds a [`Error::Parse`] with a formatted location.
    pub fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
