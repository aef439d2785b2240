//! `χ₍₋∞,0₎(D) = 𝓕* χ₍₋∞,0₎(X) 𝓕`, the projection onto negative frequencies.

use super::fourier::{Direction, FourierPlan};
use super::{SampledFunction, UniformGrid};
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// How the projection treats the finite box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectionConfig {
    /// The samples are embedded in a zero-extended grid `padding` times as
    /// wide before transforming, then restricted back. `1` gives the exact
    /// periodic projection (idempotent on sample vectors); larger values
    /// approach the compression of the full-line operator to `[-L, L]`.
    pub padding: usize,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self { padding: 1 }
    }
}

/// Weight of frequency `ξ`: 1 below zero, 0 above, ½ exactly at the edge.
pub fn frequency_weight<T: Real>(xi: T) -> T {
    if xi < T::zero() {
        T::one()
    } else if xi > T::zero() {
        T::zero()
    } else {
        T::half()
    }
}

/// Precomputed projector for one grid.
#[derive(Debug, Clone)]
pub struct NegativeFrequencyProjector<T: Real> {
    grid: UniformGrid<T>,
    padding: usize,
    forward: FourierPlan<T>,
    inverse: FourierPlan<T>,
    weights: Vec<T>,
}

impl<T: Real> NegativeFrequencyProjector<T> {
    pub fn new(grid: UniformGrid<T>, config: ProjectionConfig) -> Result<Self> {
        if config.padding == 0 {
            return Err(Error::Grid("projection padding must be at least 1, got 0".into()));
        }
        let padded = grid.padded(config.padding);
        let dual = padded.dual();
        let weights = (0..dual.len()).map(|m| frequency_weight(dual.x(m))).collect();
        Ok(Self {
            grid,
            padding: config.padding,
            forward: FourierPlan::new(padded),
            inverse: FourierPlan::new(dual),
            weights,
        })
    }

    pub fn grid(&self) -> UniformGrid<T> {
        self.grid
    }

    pub fn apply(&self, values: &[C<T>]) -> Vec<C<T>> {
        let n = self.grid.len();
        let offset = (self.padding - 1) * n / 2;
        let mut buf = vec![C::new(T::zero(), T::zero()); n * self.padding];
        buf[offset..offset + n].copy_from_slice(values);
        self.forward.apply(Direction::Forward, &mut buf);
        for (v, w) in buf.iter_mut().zip(&self.weights) {
            *v = *v * *w;
        }
        self.inverse.apply(Direction::Inverse, &mut buf);
        buf[offset..offset + n].to_vec()
    }
}

/// `χ₍₋∞,0₎(D)f` with the exact periodic convention.
pub fn negative_halfline_projection<T: Real>(f: &SampledFunction<T>) -> Result<SampledFunction<T>> {
    negative_halfline_projection_with(f, ProjectionConfig::default())
}

pub fn negative_halfline_projection_with<T: Real>(
    f: &SampledFunction<T>,
    config: ProjectionConfig,
) -> Result<SampledFunction<T>> {
    let projector = NegativeFrequencyProjector::new(f.grid, config)?;
    Ok(SampledFunction {
        grid: f.grid,
        values: projector.apply(&f.values),
    })
}
