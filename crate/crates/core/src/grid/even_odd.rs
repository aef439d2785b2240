//! The even/odd unitary `𝒰 : L²(ℝ) → L²(ℝ₊; ℂ²)`,
//! `𝒰f = √2 (f_e, f_o)` and `𝒰*(f₁, f₂)(x) = (f₁(|x|) + sgn(x) f₂(|x|))/√2`.

use super::{HalfLinePair, SampledFunction};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn even_odd_map<T: Real>(f: &SampledFunction<T>) -> HalfLinePair<T> {
    let g = f.grid;
    let h = g.half_len();
    let s = T::SQRT_2().recip();
    let mut first = Vec::with_capacity(h);
    let mut second = Vec::with_capacity(h);
    for j in 0..h {
        let pos = f.values[h + j];
        let neg = f.values[h - 1 - j];
        first.push((pos + neg) * s);
        second.push((pos - neg) * s);
    }
    HalfLinePair { grid: g, first, second }
}

pub fn even_odd_inverse<T: Real>(p: &HalfLinePair<T>) -> Result<SampledFunction<T>> {
    let g = p.grid;
    let h = g.half_len();
    if p.first.len() != h || p.second.len() != h {
        return Err(Error::Dimension {
            expected: h,
            found: p.first.len().max(p.second.len()),
        });
    }
    let s = T::SQRT_2().recip();
    let mut values = vec![crate::scalar::creal(T::zero()); g.len()];
    for j in 0..h {
        let (a, b) = (p.first[j], p.second[j]);
        values[h + j] = (a + b) * s;
        values[h - 1 - j] = (a - b) * s;
    }
    Ok(SampledFunction { grid: g, values })
}
