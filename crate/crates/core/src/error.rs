use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrix contains NaN or infinite entries")]
    NotFinite,
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.6e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("matrix is singular or too ill-conditioned (condition estimate {condition:.3e})")]
    SingularMatrix { condition: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("state {index} has norm {norm}, expected 1")]
    NotNormalized { index: usize, norm: f64 },
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("state set is linearly dependent (rank {rank} < {count})")]
    NotIndependent { rank: usize, count: usize },
    #[error("state set does not span the space ({count} states in dimension {dimension})")]
    NotSpanning { count: usize, dimension: usize },
    #[error(
        "state set is too ill-conditioned for dual states (condition estimate {condition:.3e})"
    )]
    IllConditioned { condition: f64 },
    #[error("superposition cancels to the zero vector (norm {norm:.3e})")]
    ZeroVector { norm: f64 },

    #[error("state sets have different sizes ({initial} vs {target})")]
    SizeMismatch { initial: usize, target: usize },
    #[error("dimension error: {0}")]
    DimensionError(String),
    #[error("M-matrix entry ({0}, {1}) is undefined")]
    UndefinedEntry(usize, usize),

    #[error("transformation is not feasible: {0}")]
    NotFeasible(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Kraus set was not synthesized from this initial state set")]
    FingerprintMismatch,
    #[error("superposition support has {0} element(s), at least 2 are required")]
    SupportTooSmall(usize),

    #[error("invalid input: {0}")]
    Input(String),
}
