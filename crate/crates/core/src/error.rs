//! Error type shared by all analysis modules.

use thiserror::Error;

/// Errors produced by the model, simulation, equilibrium, bifurcation and
/// control routines.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum CoreError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A trajectory component fell below the positivity floor (-1e-9).
    #[error("positivity violated at step {step} (t = {t}): state ({x}, {y})")]
    PositivityViolation { step: usize, t: f64, x: f64, y: f64 },

    /// A trajectory component became non-finite.
    #[error("solution diverged at step {step} (t = {t}): state ({x}, {y})")]
    Divergence { step: usize, t: f64, x: f64, y: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A closed-form bifurcation expression has a vanishing denominator.
    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    /// The trace never changes sign over the supplied bracket.
    #[error("no Hopf point found: {0}")]
    NoHopfFound(String),

    /// The transcription solver exhausted its iteration budget.
    #[error("solver did not converge: {message} (best residual {residual:.3e})")]
    NoConvergence { message: String, residual: f64 },

    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
