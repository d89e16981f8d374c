use thiserror::Error;

/// Errors raised by model construction and potential evaluation.
///
/// Quadrature non-convergence is not an error: it is reported through the
/// `converged` flag of [`IntegralResult`](crate::quadrature::IntegralResult)
/// and everything built on top of it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid resonance: {0}")]
    InvalidResonance(String),

    #[error("invalid atom: {0}")]
    InvalidAtom(String),

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("invalid layer stack: {0}")]
    InvalidStack(String),

    #[error("invalid atom position: {0}")]
    InvalidPosition(String),

    #[error("invalid geometry parameter: {0}")]
    InvalidGeometry(String),

    #[error("degenerate point (u, q) = (0, 0)")]
    DegeneratePoint,

    #[error("no wall length scale: {0}")]
    NoWallScale(String),

    #[error("root not bracketed: {0}")]
    NotBracketed(String),

    #[error("wall search failed: {0}")]
    WallSearch(String),

    #[error("invalid quadrature settings: {0}")]
    InvalidQuadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;
