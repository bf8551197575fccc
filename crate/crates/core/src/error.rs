use thiserror::Error;

/// Failures raised by the simulator. Numerical failures (`NonConvergence`,
/// `SingularMatrix`, `SingularCurvature`) are recoverable by the time-step
/// controller; the rest indicate bad input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("mesh invariant violated: {0}")]
    Mesh(String),

    #[error("radius h = {h:e} m is not positive at z = {z:e} m; curvature is singular")]
    SingularCurvature { z: f64, h: f64 },

    #[error("Newton iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("singular matrix: zero pivot in column {column}")]
    SingularMatrix { column: usize },

    #[error("refinement exhausted: {0}")]
    RefinementExhausted(String),

    #[error("time step underflow: dt = {dt:e} s fell below dt_min at t = {t:e} s ({cause})")]
    TimeStepUnderflow { t: f64, dt: f64, cause: String },

    #[error("true slope error is zero; effectivity is undefined")]
    ZeroTrueError,

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("config: missing required key `{0}`")]
    MissingKey(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
