//! Functions of the dilation generator `A₊` on `L²(ℝ₊)`, computed through the
//! Mellin transform `𝓜 = 𝓕𝓥` with `(𝓥f)(s) = e^{s/2} f(e^s)`.
//!
//! `η(A₊) = 𝓥* 𝓕* η(X) 𝓕 𝓥`. Discretely:
//!
//! 1. the pair is lifted to the full line with `𝒰*`, zero-extended in space
//!    and spectrally upsampled by the oversampling factor;
//! 2. each component is resampled by cubic interpolation onto a uniform grid
//!    in `s = ln x` whose spacing at `x = L` matches the upsampled grid;
//! 3. the log-grid samples are transformed, multiplied by the 2×2 symbol and
//!    transformed back;
//! 4. the result is interpolated (cubic, in `s`) back onto the half grid.
//!
//! The translation that centres the log window drops out because the symbol
//! is a pure multiplier.

use std::sync::Arc;

use super::even_odd::{even_odd_inverse, even_odd_map};
use super::fourier::{Direction, FourierPlan};
use super::{HalfLinePair, UniformGrid};
use crate::error::{Error, Result};
use crate::interp::cubic;
use crate::scalar::{creal, Real, C};

/// 2×2 complex matrix, row-major.
pub type Mat2<T> = [[C<T>; 2]; 2];

/// Where the declared limits at `±∞` are probed.
const LIMIT_PROBE: f64 = 40.0;
const LIMIT_TOLERANCE: f64 = 1e-8;

/// `φ(ξ) = tanh(πξ) + i/cosh(πξ)`, a unimodular function with `φ(±∞) = ±1`.
pub fn phi<T: Real>(xi: T) -> C<T> {
    let a = T::PI() * xi;
    C::new(a.tanh(), a.cosh().recip())
}

type Rule<T> = Arc<dyn Fn(T) -> Mat2<T> + Send + Sync>;

/// Matrix-valued symbol `ξ ↦ η(ξ)` with finite limits at `±∞`.
#[derive(Clone)]
pub struct DilationMultiplier<T: Real> {
    name: String,
    rule: Rule<T>,
    minus_infinity: Mat2<T>,
    plus_infinity: Mat2<T>,
    /// Set for symbols known to be constant; applied without resampling.
    constant: Option<Mat2<T>>,
}

impl<T: Real> std::fmt::Debug for DilationMultiplier<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DilationMultiplier")
            .field("name", &self.name)
            .field("minus_infinity", &self.minus_infinity)
            .field("plus_infinity", &self.plus_infinity)
            .finish()
    }
}

fn mat_dist<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> T {
    let mut m = T::zero();
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a[i][j] - b[i][j]).norm());
        }
    }
    m
}

impl<T: Real> DilationMultiplier<T> {
    /// Validates the declared limits by evaluating the rule at `ξ = ±40`.
    pub fn new(
        name: impl Into<String>,
        rule: impl Fn(T) -> Mat2<T> + Send + Sync + 'static,
        minus_infinity: Mat2<T>,
        plus_infinity: Mat2<T>,
    ) -> Result<Self> {
        let name = name.into();
        let probe = T::lit(LIMIT_PROBE);
        for (side, at, limit) in [("-inf", -probe, &minus_infinity), ("+inf", probe, &plus_infinity)] {
            let deviation = mat_dist(&rule(at), limit).to_f64_lossy();
            if !(deviation <= LIMIT_TOLERANCE) {
                return Err(Error::MultiplierLimit { name, side, deviation });
            }
        }
        Ok(Self {
            name,
            rule: Arc::new(rule),
            minus_infinity,
            plus_infinity,
            constant: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Evaluates the symbol; infinite arguments return the declared limits.
    pub fn eval(&self, xi: T) -> Mat2<T> {
        if xi == T::infinity() {
            self.plus_infinity
        } else if xi == T::neg_infinity() {
            self.minus_infinity
        } else {
            (self.rule)(xi)
        }
    }

    /// The matrix of a constant symbol.
    pub fn as_constant(&self) -> Option<Mat2<T>> {
        self.constant
    }

    pub fn limits(&self) -> (Mat2<T>, Mat2<T>) {
        (self.minus_infinity, self.plus_infinity)
    }

    /// `c · 1`.
    pub fn constant(c: C<T>) -> Self {
        let z = creal(T::zero());
        let m = [[c, z], [z, c]];
        Self {
            name: format!("constant({c})"),
            rule: Arc::new(move |_| m),
            minus_infinity: m,
            plus_infinity: m,
            constant: Some(m),
        }
    }

    /// Scalar symbol acting identically on both components.
    pub fn scalar(
        name: impl Into<String>,
        f: impl Fn(T) -> C<T> + Send + Sync + 'static,
        minus_infinity: C<T>,
        plus_infinity: C<T>,
    ) -> Result<Self> {
        let z = creal(T::zero());
        Self::new(
            name,
            move |xi| {
                let v = f(xi);
                [[v, z], [z, v]]
            },
            [[minus_infinity, z], [z, minus_infinity]],
            [[plus_infinity, z], [z, plus_infinity]],
        )
    }

    /// `φ` on both components.
    pub fn phi_scalar() -> Self {
        Self::scalar("phi", phi, creal(-T::one()), creal(T::one())).expect("phi approaches ±1")
    }

    /// `Φ(ξ) = ½ [[1, -conj φ(ξ)], [-φ(ξ), 1]]`, the symbol of the
    /// negative-frequency projection in the even/odd representation.
    pub fn negative_frequency_symbol() -> Self {
        let h = T::half();
        let rule = move |xi: T| {
            let p = phi(xi);
            [[creal(h), -p.conj() * h], [-p * h, creal(h)]]
        };
        let minus = [[creal(h), creal(h)], [creal(h), creal(h)]];
        let plus = [[creal(h), creal(-h)], [creal(-h), creal(h)]];
        Self::new("Phi", rule, minus, plus).expect("Phi approaches its limits")
    }
}

/// Discretization parameters for the log-grid route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MellinConfig<T: Real> {
    /// Spectral upsampling factor of the input, which also sets the log-grid
    /// spacing `ds = Δ/(L·oversampling)`.
    pub oversampling: usize,
    /// Zero extension of the box before upsampling.
    pub spatial_padding: usize,
    /// Smallest represented `x`, in units of `Δ`.
    pub floor_fraction: T,
    /// Log-window extension above `ln L`.
    pub upper_margin: T,
    /// Largest admissible fraction of the squared norm below the floor.
    pub mass_limit: T,
}

impl<T: Real> Default for MellinConfig<T> {
    fn default() -> Self {
        Self {
            oversampling: 4,
            spatial_padding: 4,
            floor_fraction: T::lit(1e-6),
            upper_margin: T::lit(8.0),
            mass_limit: T::lit(1e-6),
        }
    }
}

/// `η(A₊)` prepared for one half grid: plans and symbol samples are built once
/// and reused for every input.
#[derive(Debug, Clone)]
pub struct DilationOperator<T: Real> {
    grid: UniformGrid<T>,
    config: MellinConfig<T>,
    padded: UniformGrid<T>,
    fine: UniformGrid<T>,
    coarse_plan: FourierPlan<T>,
    fine_plan: FourierPlan<T>,
    log_plan: FourierPlan<T>,
    log_dual_plan: FourierPlan<T>,
    log_origin: T,
    log_step: T,
    floor: T,
    symbol: Vec<Mat2<T>>,
    constant: Option<Mat2<T>>,
}

impl<T: Real> DilationOperator<T> {
    pub fn new(grid: UniformGrid<T>, multiplier: &DilationMultiplier<T>, config: MellinConfig<T>) -> Result<Self> {
        if config.oversampling == 0 || config.spatial_padding == 0 {
            return Err(Error::Grid(format!(
                "mellin oversampling and padding must be positive, got {} and {}",
                config.oversampling, config.spatial_padding
            )));
        }
        if !(config.floor_fraction > T::zero() && config.floor_fraction < T::half()) {
            return Err(Error::Grid(format!(
                "mellin floor fraction must lie in (0, 1/2), got {}",
                config.floor_fraction
            )));
        }
        let delta = grid.step();
        let l = grid.half_width();
        let padded = grid.padded(config.spatial_padding);
        let fine = UniformGrid::new(padded.half_width(), padded.len() * config.oversampling)?;

        let floor = config.floor_fraction * delta;
        let s_lo = floor.ln();
        let s_hi = l.ln() + config.upper_margin;
        let log_step = delta / (l * T::from_usize_lossy(config.oversampling));
        let needed = ((s_hi - s_lo) / log_step).ceil().to_usize().unwrap_or(usize::MAX);
        let m = needed.max(16).next_power_of_two();
        let log_grid = UniformGrid::new(T::from_usize_lossy(m) * log_step * T::half(), m)?;
        let log_origin = s_lo + log_step * T::half();
        let log_dual = log_grid.dual();
        let symbol = (0..m).map(|k| multiplier.eval(log_dual.x(k))).collect();

        Ok(Self {
            grid,
            config,
            padded,
            fine,
            coarse_plan: FourierPlan::new(padded),
            fine_plan: FourierPlan::new(fine.dual()),
            log_plan: FourierPlan::new(log_grid),
            log_dual_plan: FourierPlan::new(log_dual),
            log_origin,
            log_step,
            floor,
            symbol,
            constant: multiplier.as_constant(),
        })
    }

    pub fn grid(&self) -> UniformGrid<T> {
        self.grid
    }

    /// Number of log-grid samples per component.
    pub fn log_len(&self) -> usize {
        self.symbol.len()
    }

    /// Band-limited upsampling of the full-line function behind the pair.
    fn upsample(&self, p: &HalfLinePair<T>) -> Result<Vec<C<T>>> {
        let full = even_odd_inverse(p)?;
        let n = self.grid.len();
        let np = self.padded.len();
        let nf = self.fine.len();
        let mut buf = vec![creal(T::zero()); np];
        let off = (np - n) / 2;
        buf[off..off + n].copy_from_slice(&full.values);
        self.coarse_plan.apply(Direction::Forward, &mut buf);
        let mut spec = vec![creal(T::zero()); nf];
        let off = (nf - np) / 2;
        spec[off..off + np].copy_from_slice(&buf);
        self.fine_plan.apply(Direction::Inverse, &mut spec);
        Ok(spec)
    }

    pub fn apply(&self, p: &HalfLinePair<T>) -> Result<HalfLinePair<T>> {
        if p.grid != self.grid {
            return Err(Error::Dimension {
                expected: self.grid.len(),
                found: p.grid.len(),
            });
        }
        if let Some(m) = self.constant {
            let mut out = HalfLinePair::zeros(self.grid);
            for j in 0..p.half_len() {
                let (a, b) = (p.first[j], p.second[j]);
                out.first[j] = m[0][0] * a + m[0][1] * b;
                out.second[j] = m[1][0] * a + m[1][1] * b;
            }
            return Ok(out);
        }
        let total = p.norm();
        if total == T::zero() {
            return Ok(HalfLinePair::zeros(self.grid));
        }

        let fine_full = self.upsample(p)?;
        let fine_pair = even_odd_map(&super::SampledFunction {
            grid: self.fine,
            values: fine_full,
        });
        // Parity extensions so the cubic stencil may cross the origin.
        let h = self.fine.half_len();
        let mut ext = [vec![creal(T::zero()); 2 * h], vec![creal(T::zero()); 2 * h]];
        for j in 0..h {
            ext[0][h + j] = fine_pair.first[j];
            ext[0][h - 1 - j] = fine_pair.first[j];
            ext[1][h + j] = fine_pair.second[j];
            ext[1][h - 1 - j] = -fine_pair.second[j];
        }
        let x0 = self.fine.x(0);
        let dx = self.fine.step();

        let at_zero: T = ext
            .iter()
            .map(|e| cubic(e, x0, dx, T::zero()).norm_sqr())
            .fold(T::zero(), |a, b| a + b);
        let below = at_zero * self.floor / (total * total);
        if below > self.config.mass_limit {
            return Err(Error::MellinWindow {
                below: below.to_f64_lossy(),
                floor: self.floor.to_f64_lossy(),
                limit: self.config.mass_limit.to_f64_lossy(),
            });
        }

        let m = self.symbol.len();
        let mut logs = [vec![creal(T::zero()); m], vec![creal(T::zero()); m]];
        for (c, log) in logs.iter_mut().enumerate() {
            for (k, slot) in log.iter_mut().enumerate() {
                let s = self.log_origin + self.log_step * T::from_usize_lossy(k);
                let x = s.exp();
                *slot = cubic(&ext[c], x0, dx, x) * (s * T::half()).exp();
            }
            self.log_plan.apply(Direction::Forward, log);
        }
        for k in 0..m {
            let (a, b) = (logs[0][k], logs[1][k]);
            let s = &self.symbol[k];
            logs[0][k] = s[0][0] * a + s[0][1] * b;
            logs[1][k] = s[1][0] * a + s[1][1] * b;
        }
        for log in logs.iter_mut() {
            self.log_dual_plan.apply(Direction::Inverse, log);
        }

        let points = self.grid.half_points();
        let mut out = HalfLinePair::zeros(self.grid);
        for (j, &x) in points.iter().enumerate() {
            let s = x.ln();
            let w = x.sqrt().recip();
            out.first[j] = cubic(&logs[0], self.log_origin, self.log_step, s) * w;
            out.second[j] = cubic(&logs[1], self.log_origin, self.log_step, s) * w;
        }
        Ok(out)
    }
}

/// `η(A₊) p` with output on the input grid.
pub fn apply_dilation_function<T: Real>(
    p: &HalfLinePair<T>,
    multiplier: &DilationMultiplier<T>,
    config: MellinConfig<T>,
) -> Result<HalfLinePair<T>> {
    DilationOperator::new(p.grid, multiplier, config)?.apply(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{negative_halfline_projection_with, ProjectionConfig, SampledFunction};

    fn packet(g: UniformGrid<f64>, x0: f64, k0: f64, width: f64) -> SampledFunction<f64> {
        SampledFunction::from_fn(g, |x| {
            C::from_polar((-(x - x0).powi(2) / (2.0 * width * width)).exp(), k0 * x)
        })
    }

    #[test]
    fn phi_is_unimodular_with_the_right_limits() {
        for k in -400..=400 {
            let xi = k as f64 * 0.1;
            assert!((phi(xi).norm() - 1.0).abs() <= 1e-12, "ξ={xi}");
        }
        assert!((phi(40.0f64) - C::new(1.0, 0.0)).norm() <= 1e-12);
        assert!((phi(-40.0f64) - C::new(-1.0, 0.0)).norm() <= 1e-12);
        assert_eq!(phi(0.0f64), C::new(0.0, 1.0));
    }

    #[test]
    fn wrong_limits_are_rejected() {
        let bad = DilationMultiplier::scalar(
            "tanh",
            |x: f64| C::new(x.tanh(), 0.0),
            C::new(1.0, 0.0),
            C::new(1.0, 0.0),
        );
        assert!(matches!(bad, Err(Error::MultiplierLimit { .. })));
    }

    #[test]
    fn constant_symbol_scales() {
        let g = UniformGrid::<f64>::new(20.0, 512).unwrap();
        let f = packet(g, 6.0, 1.5, 1.0);
        let p = crate::grid::even_odd_map(&f);
        let c = C::new(0.3, -1.2);
        let expected = HalfLinePair {
            grid: g,
            first: p.first.iter().map(|v| v * c).collect(),
            second: p.second.iter().map(|v| v * c).collect(),
        };
        let out = apply_dilation_function(&p, &DilationMultiplier::constant(c), MellinConfig::default()).unwrap();
        assert!(out.distance(&expected).unwrap() <= 1e-12 * expected.norm());

        // The same symbol through the log grid: only the two cubic
        // resamplings contribute.
        let opaque = DilationMultiplier::scalar("c", move |_| c, c, c).unwrap();
        let out = apply_dilation_function(&p, &opaque, MellinConfig::default()).unwrap();
        let err = out.distance(&expected).unwrap() / expected.norm();
        assert!(err <= 1e-6, "{err:e}");
    }

    #[test]
    fn symbol_of_the_projection_matches_the_fourier_route() {
        let g = UniformGrid::<f64>::new(20.0, 1024).unwrap();
        let f = packet(g, 5.0, -2.0, 1.0);
        let fourier = crate::grid::even_odd_map(
            // Wide padding keeps the slowly decaying tails of χ(D)f from wrapping.
            &negative_halfline_projection_with(&f, ProjectionConfig { padding: 64 }).unwrap(),
        );
        let mellin = apply_dilation_function(
            &crate::grid::even_odd_map(&f),
            &DilationMultiplier::negative_frequency_symbol(),
            MellinConfig::default(),
        )
        .unwrap();
        let err = mellin.distance(&fourier).unwrap() / fourier.norm();
        assert!(err <= 1e-5, "relative error {err:e}");
    }

    #[test]
    fn mass_at_the_origin_is_rejected() {
        let g = UniformGrid::<f64>::new(10.0, 256).unwrap();
        let f = packet(g, 0.0, 0.0, 1.0);
        let p = crate::grid::even_odd_map(&f);
        let cfg = MellinConfig {
            floor_fraction: 0.25,
            ..MellinConfig::default()
        };
        let r = apply_dilation_function(&p, &DilationMultiplier::phi_scalar(), cfg);
        assert!(matches!(r, Err(Error::MellinWindow { .. })), "{r:?}");
    }
}
