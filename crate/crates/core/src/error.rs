use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A pre- or postquench band closes its gap at a sampled momentum.
    #[error("gapless mode at k = {k} (epsilon_i = {eps_initial:e}, epsilon_f = {eps_final:e})")]
    DegenerateMode { k: String, eps_initial: f64, eps_final: f64 },

    #[error("no critical momentum: {0}")]
    NoSolution(String),

    #[error("not available: {0}")]
    NotAvailable(String),

    /// Quadrature failed to settle; carries the best estimate so far.
    #[error("quadrature did not converge after {levels} refinement levels (best estimate {estimate})")]
    Accuracy { levels: usize, estimate: f64 },

    #[error("ground state is degenerate (gap {gap:e} below {threshold:e})")]
    DegenerateGroundState { gap: f64, threshold: f64 },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("Hilbert-space dimension {dim} exceeds cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("eigensolver failed to converge: {0}")]
    NoConvergence(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
