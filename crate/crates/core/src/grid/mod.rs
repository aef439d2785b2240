//! Uniform grids, the unitary Fourier transform, the negative-frequency
//! projection, the even/odd representation, and functions of the dilation
//! generator on the half line.
//!
//! Grids are half-offset: `x_k = (k + 1/2 - N/2)·Δ` with `Δ = 2L/N`. The
//! origin is never a sample point and `x_k = -x_{N-1-k}` holds exactly, so the
//! mirror pairing used by the even/odd map needs no interpolation.

mod even_odd;
mod fourier;
mod mellin;
mod projection;

pub use even_odd::{even_odd_inverse, even_odd_map};
pub use fourier::{fourier_transform, Direction, FourierPlan};
pub use mellin::{apply_dilation_function, phi, DilationMultiplier, DilationOperator, Mat2, MellinConfig};
pub use projection::{
    frequency_weight, negative_halfline_projection, negative_halfline_projection_with, NegativeFrequencyProjector,
    ProjectionConfig,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{weighted_norm, Real, C};

/// Symmetric half-offset grid on `[-L, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct UniformGrid<T: Real> {
    half_width: T,
    point_count: usize,
}

impl<T: Real> UniformGrid<T> {
    pub fn new(half_width: T, point_count: usize) -> Result<Self> {
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::Grid(format!(
                "half-width must be positive and finite, got {half_width}"
            )));
        }
        if point_count < 2 || point_count % 2 != 0 {
            return Err(Error::Grid(format!(
                "point count must be even and at least 2, got {point_count}"
            )));
        }
        Ok(Self {
            half_width,
            point_count,
        })
    }

    #[inline]
    pub fn half_width(&self) -> T {
        self.half_width
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.point_count
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.point_count == 0
    }

    #[inline]
    pub fn half_len(&self) -> usize {
        self.point_count / 2
    }

    /// Spacing `Δ = 2L/N`.
    #[inline]
    pub fn step(&self) -> T {
        T::two() * self.half_width / T::from_usize_lossy(self.point_count)
    }

    #[inline]
    pub fn x(&self, k: usize) -> T {
        let offset = T::from_usize_lossy(k) + T::half() - T::from_usize_lossy(self.point_count / 2);
        offset * self.step()
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.point_count).map(|k| self.x(k)).collect()
    }

    /// Positive points `x_{N/2}, ..., x_{N-1}`, i.e. the half-line grid.
    pub fn half_points(&self) -> Vec<T> {
        (self.half_len()..self.point_count).map(|k| self.x(k)).collect()
    }

    #[inline]
    pub fn mirror(&self, k: usize) -> usize {
        self.point_count - 1 - k
    }

    /// Grid carrying the Fourier transform: same point count, spacing `π/L`.
    pub fn dual(&self) -> Self {
        let n = T::from_usize_lossy(self.point_count);
        Self {
            half_width: T::PI() * n / (T::two() * self.half_width),
            point_count: self.point_count,
        }
    }

    /// Same spacing, `factor` times as many points (and as wide).
    pub fn padded(&self, factor: usize) -> Self {
        Self {
            half_width: self.half_width * T::from_usize_lossy(factor),
            point_count: self.point_count * factor,
        }
    }

    /// Index of the grid point nearest to `x`, clamped to the grid.
    pub fn nearest(&self, x: T) -> usize {
        let pos = (x / self.step()) + T::from_usize_lossy(self.point_count / 2) - T::half();
        let k = pos.round().max(T::zero()).to_usize().unwrap_or(0);
        k.min(self.point_count - 1)
    }

    pub fn is_power_of_two(&self) -> bool {
        self.point_count.is_power_of_two()
    }
}

/// Complex samples of a function on a [`UniformGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SampledFunction<T: Real> {
    pub grid: UniformGrid<T>,
    pub values: Vec<C<T>>,
}

impl<T: Real> SampledFunction<T> {
    pub fn new(grid: UniformGrid<T>, values: Vec<C<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: UniformGrid<T>) -> Self {
        Self {
            grid,
            values: vec![C::new(T::zero(), T::zero()); grid.len()],
        }
    }

    pub fn from_fn(grid: UniformGrid<T>, f: impl Fn(T) -> C<T>) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.x(k))).collect();
        Self { grid, values }
    }

    pub fn from_real_fn(grid: UniformGrid<T>, f: impl Fn(T) -> T) -> Self {
        Self::from_fn(grid, |x| C::new(f(x), T::zero()))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Discrete L² norm `sqrt(Δ·Σ|f_k|²)`.
    pub fn norm(&self) -> T {
        weighted_norm(&self.values, self.grid.step())
    }

    /// `⟨self, other⟩ = Δ·Σ conj(self_k)·other_k`.
    pub fn inner(&self, other: &Self) -> Result<C<T>> {
        self.check_same_grid(other)?;
        let mut acc = C::new(T::zero(), T::zero());
        for (a, b) in self.values.iter().zip(&other.values) {
            acc = acc + a.conj() * b;
        }
        Ok(acc * self.grid.step())
    }

    pub fn max_abs(&self) -> T {
        crate::scalar::max_abs(&self.values)
    }

    /// `sqrt(Δ·Σ|f - g|²)`.
    pub fn distance(&self, other: &Self) -> Result<T> {
        self.check_same_grid(other)?;
        let mut acc = T::zero();
        for (a, b) in self.values.iter().zip(&other.values) {
            acc = acc + (a - b).norm_sqr();
        }
        Ok((acc * self.grid.step()).sqrt())
    }

    pub fn map(&self, f: impl Fn(T, C<T>) -> C<T>) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| f(self.grid.x(k), v))
            .collect();
        Self {
            grid: self.grid,
            values,
        }
    }

    pub fn scale(&self, c: C<T>) -> Self {
        self.map(|_, v| v * c)
    }

    /// `|f|²` as a real-valued sampled function.
    pub fn modulus_squared(&self) -> Self {
        self.map(|_, v| C::new(v.norm_sqr(), T::zero()))
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Dimension {
                expected: self.grid.len(),
                found: other.grid.len(),
            });
        }
        Ok(())
    }

    /// Cubic interpolation of the samples at an arbitrary point.
    pub fn cubic_at(&self, x: T) -> C<T> {
        crate::interp::cubic(&self.values, self.grid.x(0), self.grid.step(), x)
    }

    /// Linear interpolation of the samples at an arbitrary point.
    pub fn linear_at(&self, x: T) -> C<T> {
        crate::interp::linear(&self.values, self.grid.x(0), self.grid.step(), x)
    }
}

/// Element of `L²(ℝ₊; ℂ²)` sampled on the positive half of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct HalfLinePair<T: Real> {
    /// Full grid; the pair lives on its positive points.
    pub grid: UniformGrid<T>,
    pub first: Vec<C<T>>,
    pub second: Vec<C<T>>,
}

impl<T: Real> HalfLinePair<T> {
    pub fn new(grid: UniformGrid<T>, first: Vec<C<T>>, second: Vec<C<T>>) -> Result<Self> {
        let h = grid.half_len();
        for len in [first.len(), second.len()] {
            if len != h {
                return Err(Error::Dimension {
                    expected: h,
                    found: len,
                });
            }
        }
        Ok(Self { grid, first, second })
    }

    pub fn zeros(grid: UniformGrid<T>) -> Self {
        let z = vec![C::new(T::zero(), T::zero()); grid.half_len()];
        Self {
            grid,
            first: z.clone(),
            second: z,
        }
    }

    pub fn half_len(&self) -> usize {
        self.first.len()
    }

    /// Positive sample points.
    pub fn points(&self) -> Vec<T> {
        self.grid.half_points()
    }

    pub fn norm(&self) -> T {
        let a = weighted_norm(&self.first, self.grid.step());
        let b = weighted_norm(&self.second, self.grid.step());
        (a * a + b * b).sqrt()
    }

    pub fn distance(&self, other: &Self) -> Result<T> {
        if self.grid != other.grid {
            return Err(Error::Dimension {
                expected: self.grid.len(),
                found: other.grid.len(),
            });
        }
        let mut acc = T::zero();
        for (a, b) in self.first.iter().zip(&other.first) {
            acc = acc + (a - b).norm_sqr();
        }
        for (a, b) in self.second.iter().zip(&other.second) {
            acc = acc + (a - b).norm_sqr();
        }
        Ok((acc * self.grid.step()).sqrt())
    }

    /// Stacks the two components into one vector of length `N`
    /// (`first` then `second`), the block layout used for matrices on `𝓗`.
    pub fn stacked(&self) -> Vec<C<T>> {
        let mut v = self.first.clone();
        v.extend_from_slice(&self.second);
        v
    }

    pub fn from_stacked(grid: UniformGrid<T>, v: &[C<T>]) -> Result<Self> {
        if v.len() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                found: v.len(),
            });
        }
        let h = grid.half_len();
        Self::new(grid, v[..h].to_vec(), v[h..].to_vec())
    }
}
