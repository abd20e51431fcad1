use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A point (or a stencil point) lies outside the kernel's domain, or a
    /// nonlinear primitive was applied outside its natural domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Requested derivative orders exceed what the engine was built for.
    #[error("capability error: {0}")]
    Capability(String),

    /// Malformed expression text.
    #[error("parse error at position {position}: expected one of [{}], found {found}", expected.join(", "))]
    Parse {
        position: usize,
        expected: Vec<String>,
        found: String,
    },

    /// A variable reference does not fit the declared dimension.
    #[error("arity error at position {position}: {message}")]
    Arity { position: usize, message: String },

    /// Invalid parameters for a metric family.
    #[error("parameter error: {0}")]
    Param(String),

    /// The metric tensor is (numerically) singular at the point.
    #[error("singular metric: {0}")]
    SingularMetric(String),

    /// Two metric determinants have opposite signs, so the real root in the
    /// Painlevé integral is not defined.
    #[error("determinant sign mismatch: {0}")]
    DeterminantSign(String),

    /// The adaptive integrator could not make progress.
    #[error("step failure: {0}")]
    StepFailure(String),

    /// Malformed input that is not an expression (e.g. metric spec JSON).
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
