//! Error types shared across the library.

use thiserror::Error;

/// Everything that can go wrong while building operators, diagonalizing,
/// integrating, or evaluating coherence functions.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max asymmetry {max_asymmetry:.3e} exceeds {tol:.1e}")]
    NotHermitian { max_asymmetry: f64, tol: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("state is not normalized: |norm - 1| = {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    #[error("density matrix trace {trace:.3e} is not 1 within {tol:.1e}")]
    BadTrace { trace: f64, tol: f64 },

    #[error(
        "integration instability: trace drifted by {drift:.3e} at t = {t:.3e}; \
         reduce dt (current dt = {dt:.3e})"
    )]
    IntegrationInstability { drift: f64, t: f64, dt: f64 },

    #[error("dispersive-regime violation: detuning must be nonzero")]
    ZeroDetuning,

    #[error("invalid atom count {n_atoms}: {reason}")]
    InvalidAtomCount { n_atoms: usize, reason: &'static str },

    #[error("m = {m} is outside the Dicke ladder for j = {j} (m must run -j..j in integer steps)")]
    InvalidDickeIndex { m: f64, j: f64 },

    #[error("photon cutoff {cutoff} too small: {reason}")]
    CutoffTooSmall { cutoff: usize, reason: String },

    #[error(
        "subspace diagonalization requires a nonzero drive (mixing coefficients degenerate \
         at omega = 0); use the exact spectrum instead"
    )]
    ZeroDrive,

    #[error(
        "near-resonant gap |{label}| = {gap:.3e} below 1e-12; perturbation theory inapplicable"
    )]
    NearResonance { label: String, gap: f64 },

    #[error("degenerate denominator in g2 assembly: {value:.3e}")]
    DegenerateDenominator { value: f64 },

    #[error("undefined coherence: <J+ J-> = {value:.3e} is below {tol:.1e}{at_tau}")]
    UndefinedCoherence {
        value: f64,
        tol: f64,
        /// Formatted " at tau = ..." when the collapse happens at finite delay.
        at_tau: String,
    },

    #[error("steady state did not converge within horizon t = {horizon:.3e} (residual {residual:.3e})")]
    SteadyStateNotConverged { horizon: f64, residual: f64 },

    #[error("steady-state routes disagree: integration vs null space differ by {gap:.3e}")]
    SteadyStateMismatch { gap: f64 },

    #[error("steady state requires gamma > 0")]
    NoDissipation,

    #[error("no level crossing exists for N = {n_atoms} (need N >= 2)")]
    NoCrossing { n_atoms: usize },

    #[error("parameter out of domain: {reason}")]
    OutOfDomain { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
