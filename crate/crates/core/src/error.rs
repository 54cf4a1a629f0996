use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A problem parameter violates one of its admissibility constraints.
    /// The payload names the violated constraint.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The fibering analysis needs `A(w) > 0`; a direction with no positive
    /// part carries no Nehari point.
    #[error("direction has no positive part (A(w) = 0)")]
    NoPositivePart,

    /// No `N^-` point exists on the ray because `B(w) <= 0`.
    #[error("no N^- point on this ray: B(w) = {0} <= 0")]
    NoMinusPoint(f64),

    /// Bracket expansion for a fiber root failed: the direction is outside the
    /// range where `psi(t_max) > 0`.
    #[error("fiber root bracketing failed: {0}")]
    Bracketing(String),

    #[error("outside theorem range (λ ≥ Λ): λ = {lambda}, Λ = {lambda_star}")]
    OutsideTheoremRange { lambda: f64, lambda_star: f64 },

    #[error("no admissible start: {0}")]
    NoAdmissibleStart(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
