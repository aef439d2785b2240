pub mod cauchy;
pub mod error;
pub mod grid;
pub mod interp;
pub mod io;
pub mod levinson;
pub mod linalg;
pub mod potential;
pub mod scalar;
pub mod scattering;
pub mod spectrum;
pub mod waveop;

pub use error::{Error, Result};
pub use linalg::{CMatrix, DenseLinalg};
pub use scalar::{Real, C};

/// Double-precision entry points.
pub mod f64_types {
    pub type Grid = crate::grid::UniformGrid<f64>;
    pub type Spec = crate::potential::PotentialSpec<f64>;
    pub type Verdict = crate::levinson::LevinsonVerdict<f64>;
}

/// Single-precision entry points.
pub mod f32_types {
    pub type Grid = crate::grid::UniformGrid<f32>;
    pub type Spec = crate::potential::PotentialSpec<f32>;
    pub type Verdict = crate::levinson::LevinsonVerdict<f32>;
}
