use thiserror::Error;

/// Everything that can go wrong while evaluating a closed form, a quadrature
/// or an optimizer run.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument outside the range a function is defined (or needed) on.
    #[error("{function}: argument {value} is outside the supported domain {domain}")]
    Domain {
        function: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// The exact result is finite but not representable as an `f64`.
    #[error("{function}: result overflows f64 at argument {value}")]
    Overflow { function: &'static str, value: f64 },

    /// An iterative method ran out of budget before meeting its tolerance.
    #[error("{operation} did not converge: {detail}")]
    NonConvergence { operation: &'static str, detail: String },

    /// Inputs that satisfy the type invariants but hit a singular point of a
    /// formula.
    #[error("degenerate input to {operation}: {detail}")]
    Degenerate { operation: &'static str, detail: String },

    /// A configuration value that violates a type invariant.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
