//! Crate-wide error type.

use thiserror::Error;

use crate::propagate::EvolutionTrace;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not Hermitian: residual {residual:.3e}")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive semidefinite: eigenvalue {min_eigenvalue:.3e}")]
    NotPsd { min_eigenvalue: f64 },
    #[error("diagonal entry {index} is {value:.6e}, expected 1")]
    NotUnitDiagonal { index: usize, value: f64 },
    #[error("labels must be distinct, non-empty strings of equal length: {0}")]
    BadLabels(String),
    #[error("symbol {symbol:?} out of range for alphabet size {alphabet}")]
    SymbolOutOfRange { symbol: char, alphabet: usize },
    #[error(
        "infeasible factorization: residual {residual:.3e} at pair ({x}, {y}) exceeds {tol:.1e}"
    )]
    InfeasibleFactorization {
        residual: f64,
        x: String,
        y: String,
        tol: f64,
    },
    #[error("certificate constraint violated: ||gamma ∘ mask_{j}|| = {norm:.6} > 1")]
    CertificateViolation { j: usize, norm: f64 },
    #[error("epsilon must lie in (0, 1], got {0}")]
    InvalidEpsilon(f64),
    #[error("problem too large for the desk-scale solver: {0}")]
    TooLarge(String),
    #[error(
        "integrator did not converge: Richardson gap {gap:.3e} > {tol:.1e} after {doublings} doublings"
    )]
    IntegratorNonConvergence {
        gap: f64,
        tol: f64,
        doublings: usize,
        coarse: Box<EvolutionTrace>,
        fine: Box<EvolutionTrace>,
    },
    #[error("commutator residual {0:.3e} exceeds tolerance")]
    CommutatorResidual(f64),
    #[error("unitarity drift {0:.3e} exceeds tolerance")]
    UnitarityDrift(f64),
    #[error("derivative cross-check failed: {0}")]
    CrossCheck(String),
    #[error("invalid input file: {0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
