use thiserror::Error;

pub type Result<T> = std::result::Result<T, CatError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatError {
    /// Truncated probability weight exceeds the configured tolerance.
    #[error("cutoff too small for {context}: truncated weight {mass:.3e} exceeds tolerance {tolerance:.1e}")]
    CutoffTooSmall {
        context: String,
        mass: f64,
        tolerance: f64,
    },

    #[error("tensor dimension {dim} exceeds limit {limit}")]
    SizeOverflow { dim: usize, limit: usize },

    #[error("zero norm: {0}")]
    ZeroNorm(&'static str),

    /// The requested phase shift is (numerically) zero modulo 2π.
    #[error("degenerate phase phi = {phi}: {constraint}")]
    DegeneratePhase { phi: f64, constraint: &'static str },

    #[error("infeasible condition: {0}")]
    InfeasibleCondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
