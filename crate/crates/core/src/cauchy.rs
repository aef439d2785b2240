//! Boundary values `I±(x) = lim_{ε↓0} ∫ |u(y)|²/(x - y ± iε) dy` of the Cauchy
//! integral of `|u|²`.
//!
//! The real part is a principal-value integral computed by singularity
//! subtraction; the imaginary part is `∓π|u(x)|²`. An independent oracle
//! integrates the regularized kernel at finite `ε` and extrapolates.

use num_traits::Float;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{SampledFunction, UniformGrid};
use crate::interp;
use crate::potential::SampledPotential;
use crate::scalar::{cplx, Real, C};

/// `|u|²` at the grid ends, relative to its maximum, above which the box is
/// considered too small.
pub const EDGE_WEIGHT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BoundaryValues<T: Real> {
    pub grid: UniformGrid<T>,
    pub i_plus: Vec<C<T>>,
    pub i_minus: Vec<C<T>>,
    /// `PV∫ |u(y)|²/(x-y) dy`
    pub pv_part: Vec<T>,
    /// Bound on the neglected `∫_{|y|>L} |u|²`, assuming at least `y⁻²` decay.
    pub tail_estimate: T,
}

fn check_pole<T: Real>(grid: UniformGrid<T>, x: T) -> Result<()> {
    let l = grid.half_width();
    // The outermost samples sit exactly Δ/2 inside the box and are admissible.
    if !(l - Float::abs(x) >= grid.step() * T::lit(0.5 - 1e-9)) {
        return Err(Error::PoleAtEdge {
            x: x.to_f64_lossy(),
            half_width: l.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Centered derivative of the samples at index `j`: sixth order in the
/// interior, lower order near the ends.
fn derivative<T: Real>(w: &[T], j: usize, h: T) -> T {
    let n = w.len();
    if j >= 3 && j + 3 < n {
        ((w[j + 3] - w[j - 3]) / T::lit(60.0) - (w[j + 2] - w[j - 2]) * T::lit(0.15)
            + (w[j + 1] - w[j - 1]) * T::lit(0.75))
            / h
    } else if j >= 1 && j + 1 < n {
        (w[j + 1] - w[j - 1]) / (T::two() * h)
    } else if j == 0 {
        (w[1] - w[0]) / h
    } else {
        (w[j] - w[j - 1]) / h
    }
}

/// `PV∫ w(y)/(x_j-y) dy` at the grid point `x_j`.
///
/// `Σ_{k≠j} (w_k - w_j)/(x_j - y_k)·Δ + w_j·ln((x_j+L)/(L-x_j))`, with the
/// omitted cell filled by its limit `-w'(x_j)·Δ`. `w` is taken to vanish
/// outside `[-L, L]`.
fn pv_on_grid<T: Real>(grid: UniformGrid<T>, w: &[T], j: usize) -> T {
    let d = grid.step();
    let l = grid.half_width();
    let x = grid.x(j);
    let wj = w[j];
    let mut acc = T::zero();
    for (k, &wk) in w.iter().enumerate() {
        if k != j {
            acc = acc + (wk - wj) / (x - grid.x(k));
        }
    }
    acc = acc - derivative(w, j, d);
    acc * d + wj * ((x + l) / (l - x)).ln()
}

fn real_weight<T: Real>(w: &SampledFunction<T>) -> Vec<T> {
    w.values.iter().map(|z| z.re).collect()
}

/// `PV∫ w(y)/(x-y) dy` for `w` sampled on a grid (real part used).
///
/// Grid points use the subtraction formula directly; any other `x` goes
/// through [`pv_at`].
pub fn principal_value_integral<T: Real>(w: &SampledFunction<T>, x: T) -> Result<T> {
    let grid = w.grid;
    check_pole(grid, x)?;
    let weights = real_weight(w);
    let j = grid.nearest(x);
    if Float::abs(grid.x(j) - x) <= grid.step() * T::lit(1e-9) {
        Ok(pv_on_grid(grid, &weights, j))
    } else {
        pv_at(grid, &weights, x)
    }
}

/// Principal value at an arbitrary point.
///
/// The subtracted integrand `(w(y) - w(x))/(x - y)` is smooth, so the plain
/// midpoint sum over the samples converges fast; only `w(x)` itself needs
/// interpolation. Splitting the cells next to `x` would not help: it brings
/// in interpolated values of `w` everywhere near the pole, and their error is
/// what then dominates.
pub fn pv_at<T: Real>(grid: UniformGrid<T>, w: &[T], x: T) -> Result<T> {
    check_pole(grid, x)?;
    let d = grid.step();
    let l = grid.half_width();
    let origin = grid.x(0);
    let complex: Vec<C<T>> = w.iter().map(|&v| cplx(v, T::zero())).collect();
    let interp_w = |y: T| interp::cubic(&complex, origin, d, y).re;
    let wx = interp_w(x);
    let mut acc = T::zero();
    for (k, &wk) in w.iter().enumerate() {
        let gap = x - grid.x(k);
        if Float::abs(gap) <= d * T::lit(1e-9) {
            acc = acc - derivative(w, k, d);
        } else {
            acc = acc + (wk - wx) / gap;
        }
    }
    Ok(acc * d + wx * ((x + l) / (l - x)).ln())
}

/// `I±` at every grid point.
pub fn boundary_values<T: Real>(potential: &SampledPotential<T>) -> Result<BoundaryValues<T>> {
    let grid = potential.grid();
    let w = potential.weight();
    let n = grid.len();
    let peak = w.iter().fold(T::zero(), |a, &b| a.max(b));
    let edge = w[0].max(w[n - 1]);
    if edge > T::lit(EDGE_WEIGHT) * peak {
        return Err(Error::Cauchy(format!(
            "|u|² at the grid ends is {edge:e}, above {EDGE_WEIGHT:e}·max|u|² = {:e}; enlarge L = {}",
            T::lit(EDGE_WEIGHT) * peak,
            grid.half_width()
        )));
    }
    let pv_part: Vec<T> = (0..n).into_par_iter().map(|j| pv_on_grid(grid, &w, j)).collect();
    let pi = T::PI();
    let i_plus: Vec<C<T>> = pv_part.iter().zip(&w).map(|(&p, &wk)| cplx(p, -pi * wk)).collect();
    let i_minus = i_plus.iter().map(|z| z.conj()).collect();
    Ok(BoundaryValues {
        grid,
        i_plus,
        i_minus,
        pv_part,
        tail_estimate: edge * grid.half_width(),
    })
}

/// Output of [`epsilon_limit_oracle`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EpsilonOracle<T: Real> {
    /// Extrapolated `I₊(x)`.
    pub value: C<T>,
    /// Richardson table; row `i` column `j` removes the first `j` powers of `ε`.
    pub table: Vec<Vec<C<T>>>,
    /// `|T[i][0] - T[i-1][0]|`, which must decrease.
    pub differences: Vec<T>,
}

/// `I₊ᵉ(x) = ∫ |u(y)|²/(x-y+iε) dy` by plain quadrature for each `ε`,
/// extrapolated to `ε → 0` assuming an expansion in integer powers of `ε`.
pub fn epsilon_limit_oracle<T: Real>(u: &SampledFunction<T>, x: T, eps_schedule: &[T]) -> Result<EpsilonOracle<T>> {
    let grid = u.grid;
    if eps_schedule.len() < 2 {
        return Err(Error::Cauchy(format!(
            "epsilon schedule needs at least 2 entries, got {}",
            eps_schedule.len()
        )));
    }
    for pair in eps_schedule.windows(2) {
        if !(pair[1] < pair[0]) {
            return Err(Error::Cauchy(format!(
                "epsilon schedule must decrease strictly, got {eps_schedule:?}",
            )));
        }
    }
    let smallest = eps_schedule[eps_schedule.len() - 1];
    if !(smallest >= grid.step()) {
        return Err(Error::Cauchy(format!(
            "smallest epsilon {smallest} is below the grid step {}; refine the grid",
            grid.step()
        )));
    }
    let d = grid.step();
    let raw: Vec<C<T>> = eps_schedule
        .par_iter()
        .map(|&eps| {
            let mut acc = C::new(T::zero(), T::zero());
            for (k, v) in u.values.iter().enumerate() {
                acc = acc + cplx(v.norm_sqr(), T::zero()) / cplx(x - grid.x(k), eps);
            }
            acc * d
        })
        .collect();

    let mut table: Vec<Vec<C<T>>> = Vec::with_capacity(raw.len());
    for (i, &r) in raw.iter().enumerate() {
        let mut row = vec![r];
        // Neville's scheme for the polynomial in ε through the last j+1 points,
        // evaluated at ε = 0.
        for j in 1..=i {
            let prev = table[i - 1][j - 1];
            let cur = row[j - 1];
            let factor = eps_schedule[i] / (eps_schedule[i - j] - eps_schedule[i]);
            row.push(cur + (cur - prev) * factor);
        }
        table.push(row);
    }
    let differences: Vec<T> = raw.windows(2).map(|p| (p[1] - p[0]).norm()).collect();
    // A table that has converged exactly (zero weight) is accepted.
    let settled = differences.iter().all(|&d| d == T::zero());
    if !settled && differences.windows(2).any(|p| !(p[1] < p[0])) {
        return Err(Error::NonMonotoneExtrapolation {
            differences: differences.iter().map(|d| d.to_f64_lossy()).collect(),
        });
    }
    let value = *table.last().and_then(|r| r.last()).expect("non-empty table");
    Ok(EpsilonOracle {
        value,
        table,
        differences,
    })
}
