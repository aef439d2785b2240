use thiserror::Error;

/// Errors raised by the laboratory.
///
/// Every message names the module that rejected the input, the precondition
/// that failed, and the offending value.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid: {0}")]
    Grid(String),

    #[error("grid: incompatible dimensions: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error(
        "grid.mellin: {below:.3e} of the input norm lies below the log-window floor x = {floor:.3e} (limit {limit:.1e}); enlarge the window"
    )]
    MellinWindow { below: f64, floor: f64, limit: f64 },

    #[error(
        "grid.mellin: multiplier `{name}` does not approach its declared limit at {side}: deviation {deviation:.3e}"
    )]
    MultiplierLimit {
        name: String,
        side: &'static str,
        deviation: f64,
    },

    #[error("potential: {0}")]
    Potential(String),

    #[error("potential: table {path}: {reason}")]
    Table { path: String, reason: String },

    #[error("potential.holder: only {found} separations with |u(x)-u(y)| > 1e-13 in the window (need 16)")]
    HolderPairs { found: usize },

    #[error("cauchy: x = {x} lies within one grid step of the window edge ±{half_width}; enlarge L")]
    PoleAtEdge { x: f64, half_width: f64 },

    #[error("cauchy: {0}")]
    Cauchy(String),

    #[error("cauchy.oracle: extrapolation table is not monotone (differences {differences:?}); grid under-resolved")]
    NonMonotoneExtrapolation { differences: Vec<f64> },

    #[error("scattering: {0}")]
    Scattering(String),

    #[error("scattering: {count} exceptional points exceed the limit of {limit}")]
    TooManyExceptional { count: usize, limit: usize },

    #[error("scattering.winding: |S| deviates from 1 by {deviation:.3e} at x = {x}")]
    NotUnimodular { x: f64, deviation: f64 },

    #[error("scattering.winding: endpoint deviation {deviation:.3e} exceeds {limit} at the {side} end")]
    EndpointDeviation {
        side: &'static str,
        deviation: f64,
        limit: f64,
    },

    #[error("scattering.winding: phase step {step:.3} rad between x = {x} and its neighbour exceeds {limit:.3} rad; grid too coarse")]
    PhaseStep { x: f64, step: f64, limit: f64 },

    #[error("scattering.winding: total phase / 2π = {turns:.4} is not within {limit} of an integer")]
    NonIntegerWinding { turns: f64, limit: f64 },

    #[error(
        "scattering.winding: 1 - I₊ changes sign between x = {x:.6} and the next sample outside the zero set of u \
         (phase step {step:.3}); S turns inside one grid cell, refine the grid"
    )]
    UnresolvedTurn { x: f64, step: f64 },

    #[error("spectrum: {0}")]
    Spectrum(String),

    #[error("waveop: {0}")]
    WaveOp(String),

    #[error("waveop.time_dependent: Cauchy differences do not decrease: {differences:?}")]
    NonDecreasingCauchy { differences: Vec<f64> },

    #[error("waveop.boundary_symbol: corner mismatch {mismatch:.3e} at {corner}")]
    CornerMismatch { corner: &'static str, mismatch: f64 },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
