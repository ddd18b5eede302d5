use thiserror::Error;

use crate::linalg::C64;

/// Errors raised by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },

    #[error(
        "Sylvester/Lyapunov equation is ill-posed: spectra overlap (min |a_i + b_j| = {gap:e})"
    )]
    SpectraOverlap { gap: f64 },

    #[error("matrix is numerically singular: pivot {pivot:e} at index {index}")]
    Singular { pivot: f64, index: usize },

    #[error("Gramian is singular (pivot {pivot:e}); check that the pair (A, B) is controllable")]
    SingularGramian { pivot: f64 },

    #[error("matrix is not Hermitian positive definite (eigenvalue {eigenvalue:e})")]
    NotPositiveDefinite { eigenvalue: f64 },

    #[error("value out of floating-point range while evaluating horizon T = {horizon}")]
    Range { horizon: f64 },

    #[error("simulation overflowed at t = {time}")]
    SimulationOverflow { time: f64 },

    #[error("pair is not stabilizable; offending eigenvalue(s): {}", fmt_eigs(.eigenvalues))]
    NotStabilizable { eigenvalues: Vec<C64> },

    #[error("pair is not controllable")]
    NotControllable,

    #[error("invalid Jordan declaration: {0}")]
    InvalidJordan(String),

    #[error("field mismatch: {0}")]
    Field(String),

    #[error("negative horizon T = {0}")]
    NegativeHorizon(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("empty block: {0}")]
    EmptyBlock(String),

    #[error("entry is not an exact real rational: {0}")]
    NonRational(String),

    #[error("exact oracle mismatch: {0}")]
    OracleMismatch(String),

    #[error("input error: {0}")]
    Input(String),
}

fn fmt_eigs(eigs: &[C64]) -> String {
    eigs.iter()
        .map(|z| format!("{:.6}{:+.6}i", z.re, z.im))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;
