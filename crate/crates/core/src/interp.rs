//! Local interpolation on uniform samples.

use crate::scalar::{Real, C};

/// Four-point Lagrange (cubic) interpolation of samples `values[k]` taken at
/// `origin + k·step`. Outside the sampled range the result is zero; near the
/// ends the stencil is shifted inward.
pub fn cubic<T: Real>(values: &[C<T>], origin: T, step: T, x: T) -> C<T> {
    let n = values.len();
    if n == 0 {
        return C::new(T::zero(), T::zero());
    }
    let pos = (x - origin) / step;
    let last = T::from_usize_lossy(n - 1);
    if !(pos >= T::zero() && pos <= last) {
        return C::new(T::zero(), T::zero());
    }
    if n < 4 {
        return linear(values, origin, step, x);
    }
    let base = pos.floor().to_usize().unwrap_or(0);
    let start = base.saturating_sub(1).min(n - 4);
    let t = pos - T::from_usize_lossy(start);
    // nodes at 0,1,2,3 relative to `start`
    let one = T::one();
    let two = T::two();
    let three = T::lit(3.0);
    let six = T::lit(6.0);
    let w0 = -(t - one) * (t - two) * (t - three) / six;
    let w1 = t * (t - two) * (t - three) / two;
    let w2 = -t * (t - one) * (t - three) / two;
    let w3 = t * (t - one) * (t - two) / six;
    values[start] * w0 + values[start + 1] * w1 + values[start + 2] * w2 + values[start + 3] * w3
}

/// Piecewise-linear interpolation with the same conventions as [`cubic`].
/// Never overshoots the sampled values, which the zero-set tests rely on.
pub fn linear<T: Real>(values: &[C<T>], origin: T, step: T, x: T) -> C<T> {
    let n = values.len();
    if n == 0 {
        return C::new(T::zero(), T::zero());
    }
    let pos = (x - origin) / step;
    let last = T::from_usize_lossy(n - 1);
    if !(pos >= T::zero() && pos <= last) {
        return C::new(T::zero(), T::zero());
    }
    if n == 1 {
        return values[0];
    }
    let base = pos.floor().to_usize().unwrap_or(0).min(n - 2);
    let t = pos - T::from_usize_lossy(base);
    values[base] * (T::one() - t) + values[base + 1] * t
}
