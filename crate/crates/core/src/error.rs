use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid spin quantum number {0}: must be a positive half-integer")]
    InvalidSpin(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown manifold label `{0}`")]
    UnknownManifold(String),
    #[error("manifold {manifold} has no spin factor {factor}")]
    UnknownFactor { manifold: &'static str, factor: usize },
    #[error("operator is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("eigenvector basis is ill-conditioned (condition {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("trace drifted by {drift:e} during propagation")]
    TraceDrift { drift: f64 },
    #[error("invalid density operator: {0}")]
    InvalidState(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("reference state is not stationary (residual {residual:e})")]
    NotStationary { residual: f64 },
    #[error("reference state does not commute with the Hamiltonian (defect {defect:e})")]
    NonCommuting { defect: f64 },
    #[error("operation requires a {expected} space")]
    WrongModel { expected: &'static str },
    #[error("superoperator vectorization conventions differ")]
    ConventionMismatch,
}
