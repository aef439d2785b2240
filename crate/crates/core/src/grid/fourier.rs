//! Unitary Fourier transform `(𝓕f)(ξ) = (2π)^{-1/2} ∫ e^{-iξy} f(y) dy` on
//! half-offset grids.
//!
//! With `x_k = (k+c)Δ`, `ξ_m = (m+c)Δ̂`, `c = (1-N)/2` and `ΔΔ̂ = 2π/N`, the
//! discretized integral is an ordinary DFT wrapped in two diagonal phase
//! factors. The output lives on [`UniformGrid::dual`]; applying the dual twice
//! returns the original grid, so `𝓕*𝓕` is the identity on sample vectors.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::{SampledFunction, UniformGrid};
use crate::error::Result;
use crate::scalar::{Real, C};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `𝓕`
    Forward,
    /// `𝓕*`
    Inverse,
}

/// Reusable FFT plan plus phase corrections for one input grid.
///
/// Cheap to clone and safe to share between threads.
#[derive(Clone)]
pub struct FourierPlan<T: Real> {
    grid: UniformGrid<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    /// `e^{-iθck}`
    pre: Arc<Vec<C<T>>>,
    /// `e^{-iθc(m+c)}`
    post: Arc<Vec<C<T>>>,
    scale: T,
}

impl<T: Real> std::fmt::Debug for FourierPlan<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierPlan").field("grid", &self.grid).finish()
    }
}

impl<T: Real> FourierPlan<T> {
    pub fn new(grid: UniformGrid<T>) -> Self {
        let n = grid.len();
        let mut planner = FftPlanner::<T>::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let ni = n as i128;
        let pre = (0..n)
            .map(|k| {
                // θck = π·[(1-N)k mod 2N]/N
                let r = ((1 - ni) * k as i128).rem_euclid(2 * ni);
                unit(-PI * r as f64 / n as f64)
            })
            .collect();
        let post = (0..n)
            .map(|m| {
                // θc(m+c) = π·[(1-N)(2m+1-N) mod 4N]/(2N)
                let r = ((1 - ni) * (2 * m as i128 + 1 - ni)).rem_euclid(4 * ni);
                unit(-PI * r as f64 / (2.0 * n as f64))
            })
            .collect();
        let scale = grid.step() / T::lit((2.0 * PI).sqrt());
        Self {
            grid,
            forward,
            inverse,
            pre: Arc::new(pre),
            post: Arc::new(post),
            scale,
        }
    }

    /// Grid the plan accepts as input.
    pub fn grid(&self) -> UniformGrid<T> {
        self.grid
    }

    /// Grid the output lives on.
    pub fn output_grid(&self) -> UniformGrid<T> {
        self.grid.dual()
    }

    /// Transforms `buf` in place. `buf.len()` must equal the grid size.
    pub fn apply(&self, direction: Direction, buf: &mut [C<T>]) {
        assert_eq!(buf.len(), self.grid.len(), "buffer length must match the plan");
        match direction {
            Direction::Forward => {
                for (v, p) in buf.iter_mut().zip(self.pre.iter()) {
                    *v = *v * p;
                }
                self.forward.process(buf);
                for (v, p) in buf.iter_mut().zip(self.post.iter()) {
                    *v = *v * p * self.scale;
                }
            }
            Direction::Inverse => {
                for (v, p) in buf.iter_mut().zip(self.pre.iter()) {
                    *v = *v * p.conj();
                }
                self.inverse.process(buf);
                for (v, p) in buf.iter_mut().zip(self.post.iter()) {
                    *v = *v * p.conj() * self.scale;
                }
            }
        }
    }

    pub fn transform(&self, f: &SampledFunction<T>, direction: Direction) -> SampledFunction<T> {
        let mut values = f.values.clone();
        self.apply(direction, &mut values);
        SampledFunction {
            grid: self.output_grid(),
            values,
        }
    }
}

fn unit<T: Real>(angle: f64) -> C<T> {
    C::new(T::lit(angle.cos()), T::lit(angle.sin()))
}

/// `𝓕f` (or `𝓕*f`), returned on the dual grid of `f.grid`.
pub fn fourier_transform<T: Real>(f: &SampledFunction<T>, direction: Direction) -> Result<SampledFunction<T>> {
    // UniformGrid construction already guarantees an even point count.
    Ok(FourierPlan::new(f.grid).transform(f, direction))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::C;

    /// Direct O(N²) summation of the discretized integral.
    fn brute_force(f: &SampledFunction<f64>, direction: Direction) -> SampledFunction<f64> {
        let out = f.grid.dual();
        let sign = match direction {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        };
        let scale = f.grid.step() / (2.0 * PI).sqrt();
        let values = (0..out.len())
            .map(|m| {
                let xi = out.x(m);
                let mut acc = C::new(0.0, 0.0);
                for k in 0..f.grid.len() {
                    acc += f.values[k] * C::from_polar(1.0, sign * xi * f.grid.x(k));
                }
                acc * scale
            })
            .collect();
        SampledFunction { grid: out, values }
    }

    fn lcg_vector(n: usize, seed: u64) -> Vec<C<f64>> {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        (0..n).map(|_| C::new(next(), next())).collect()
    }

    #[test]
    fn gaussian_is_a_fixed_point() {
        let g = UniformGrid::<f64>::new(20.0, 1024).unwrap();
        let f = SampledFunction::from_real_fn(g, |x| (-x * x / 2.0).exp());
        let ff = fourier_transform(&f, Direction::Forward).unwrap();
        let err = ff
            .values
            .iter()
            .enumerate()
            .map(|(m, v)| (v - C::new((-ff.grid.x(m).powi(2) / 2.0).exp(), 0.0)).norm())
            .fold(0.0, f64::max);
        assert!(err <= 1e-10, "max error {err:e}");
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = UniformGrid::<f64>::new(3.0, 64).unwrap();
        let f = SampledFunction::<f64>::zeros(g);
        let ff = fourier_transform(&f, Direction::Forward).unwrap();
        assert!(ff.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn matches_brute_force_summation_and_round_trips() {
        let g = UniformGrid::<f64>::new(7.5, 256).unwrap();
        let f = SampledFunction::new(g, lcg_vector(256, 7)).unwrap();
        for dir in [Direction::Forward, Direction::Inverse] {
            let fast = fourier_transform(&f, dir).unwrap();
            let slow = brute_force(&f, dir);
            let err = fast.distance(&slow).unwrap() / slow.norm();
            assert!(err < 1e-12, "{dir:?}: {err:e}");
        }
        // 𝓕*(𝓕f) through the oracle on both legs.
        let there = brute_force(&f, Direction::Forward);
        let back = brute_force(&there, Direction::Inverse);
        let fast_back =
            fourier_transform(&fourier_transform(&f, Direction::Forward).unwrap(), Direction::Inverse).unwrap();
        assert!(back.distance(&f).unwrap() <= 1e-10 * f.norm());
        assert!(fast_back.distance(&f).unwrap() <= 1e-10 * f.norm());
    }

    #[test]
    fn works_in_single_precision() {
        let g = UniformGrid::<f32>::new(12.0, 256).unwrap();
        let f = SampledFunction::from_real_fn(g, |x| (-x * x / 2.0).exp());
        let ff = fourier_transform(&f, Direction::Forward).unwrap();
        let back = fourier_transform(&ff, Direction::Inverse).unwrap();
        assert!(back.distance(&f).unwrap() < 1e-5);
        assert!((ff.norm() - f.norm()).abs() < 1e-5);
    }

    proptest::proptest! {
        #[test]
        fn transform_is_unitary(seed in 0u64..1000, half in 1.0f64..50.0) {
            let g = UniformGrid::<f64>::new(half, 128).unwrap();
            let f = SampledFunction::new(g, lcg_vector(128, seed)).unwrap();
            let ff = fourier_transform(&f, Direction::Forward).unwrap();
            proptest::prop_assert!((ff.norm() - f.norm()).abs() <= 1e-12 * f.norm());
        }
    }
}
