//! The scattering function `S(x) = 1 - 2πi|u(x)|²/(1 - I₊(x))`, its even and
//! odd parts, the weight `ψ = ū/(1 - I₊)`, and the winding number of `S`.

use std::f64::consts::PI;
use std::io::Write;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::cauchy::BoundaryValues;
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::io;
use crate::potential::SampledPotential;
use crate::scalar::{cplx, creal, Real, C};

/// Points with `|1 - I₊| ≤ SINGULAR_DENOMINATOR` are treated as exceptional.
pub const SINGULAR_DENOMINATOR: f64 = 1e-8;
/// More exceptional grid points than this is treated as a pathology.
pub const MAX_EXCEPTIONAL: usize = 8;

/// Tolerances of [`winding_number`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindingConfig {
    /// Largest admissible `|S(±L) - endpoint|`.
    pub endpoint_tolerance: f64,
    /// Largest admissible `||S| - 1|`.
    pub unimodular_tolerance: f64,
    /// Largest admissible phase increment between neighbours. Increments are
    /// measured as principal arguments of `S_{k+1}/S_k`, so anything close to
    /// `π` is already ambiguous.
    pub max_phase_step: f64,
    /// Largest admissible distance of the open phase total, in turns, from
    /// the integer obtained by closing the loop.
    pub integer_tolerance: f64,
}

impl Default for WindingConfig {
    fn default() -> Self {
        Self {
            endpoint_tolerance: 0.2,
            unimodular_tolerance: 1e-6,
            max_phase_step: PI / 2.0,
            integer_tolerance: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ScatteringData<T: Real> {
    pub grid: UniformGrid<T>,
    pub s: Vec<C<T>>,
    /// `(S(x) + S(-x))/2` on the positive half grid.
    pub s_even: Vec<C<T>>,
    /// `(S(x) - S(-x))/2` on the positive half grid.
    pub s_odd: Vec<C<T>>,
    /// Continuous branch of `arg S` along the grid, starting from the
    /// principal value at the first point.
    pub unwrapped_phase: Vec<T>,
    /// `None` when [`winding_number`] rejected the curve; see `winding_failure`.
    pub winding: Option<i64>,
    pub winding_failure: Option<String>,
    /// The rejection itself, for callers that must propagate it.
    #[serde(skip)]
    pub winding_error: Option<Error>,
    /// Grid points where `|1 - I₊| ≤ 1e-8`.
    pub exceptional_points: Vec<T>,
    /// Indices whose value was filled by phase interpolation between
    /// neighbours rather than by the formula.
    pub interpolated: Vec<usize>,
}

impl<T: Real> ScatteringData<T> {
    /// `S(0)`, the common limit of `s_e` at the origin: cubic interpolation
    /// across the innermost samples, put back on the unit circle.
    pub fn s_even_at_origin(&self) -> C<T> {
        let z = crate::interp::cubic(&self.s, self.grid.x(0), self.grid.step(), T::zero());
        z / z.norm()
    }

    /// The winding number, or the error that rejected it.
    pub fn winding_result(&self) -> Result<i64> {
        match (self.winding, &self.winding_error, &self.winding_failure) {
            (Some(w), _, _) => Ok(w),
            (None, Some(e), _) => Err(e.clone()),
            (None, None, reason) => Err(Error::Scattering(
                reason.clone().unwrap_or_else(|| "winding number missing".into()),
            )),
        }
    }

    /// `|S(x_first) - 1|` and `|S(x_last) - 1|`.
    pub fn endpoint_deviations(&self) -> (T, T) {
        let one = creal(T::one());
        ((self.s[0] - one).norm(), (self.s[self.s.len() - 1] - one).norm())
    }

    /// Writes `x, re_s, im_s, phase`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows = (0..self.grid.len()).map(|k| {
            vec![
                self.grid.x(k).to_f64_lossy(),
                self.s[k].re.to_f64_lossy(),
                self.s[k].im.to_f64_lossy(),
                self.unwrapped_phase[k].to_f64_lossy(),
            ]
        });
        io::write_csv(out, &["x", "re_s", "im_s", "phase"], rows)
    }
}

/// `1 - I₊` at every grid point.
pub fn denominator<T: Real>(bv: &BoundaryValues<T>) -> Vec<C<T>> {
    bv.i_plus.iter().map(|z| creal::<T>(T::one()) - z).collect()
}

fn check_inputs<T: Real>(potential: &SampledPotential<T>, bv: &BoundaryValues<T>) -> Result<()> {
    if potential.grid() != bv.grid {
        return Err(Error::Dimension {
            expected: potential.grid().len(),
            found: bv.grid.len(),
        });
    }
    Ok(())
}

pub fn scattering_matrix<T: Real>(
    potential: &SampledPotential<T>,
    bv: &BoundaryValues<T>,
) -> Result<ScatteringData<T>> {
    scattering_matrix_with(potential, bv, WindingConfig::default())
}

pub fn scattering_matrix_with<T: Real>(
    potential: &SampledPotential<T>,
    bv: &BoundaryValues<T>,
    config: WindingConfig,
) -> Result<ScatteringData<T>> {
    check_inputs(potential, bv)?;
    let grid = bv.grid;
    let n = grid.len();
    let w = potential.weight();
    let d = denominator(bv);
    let tiny = T::lit(SINGULAR_DENOMINATOR);
    let two_pi_i = cplx(T::zero(), T::two() * T::PI());
    let mut s: Vec<C<T>> = Vec::with_capacity(n);
    let mut interpolated = Vec::new();
    for k in 0..n {
        if d[k].norm() <= tiny {
            interpolated.push(k);
            s.push(creal(T::one()));
        } else {
            s.push(creal::<T>(T::one()) - two_pi_i * w[k] / d[k]);
        }
    }
    if interpolated.len() > MAX_EXCEPTIONAL {
        return Err(Error::TooManyExceptional {
            count: interpolated.len(),
            limit: MAX_EXCEPTIONAL,
        });
    }
    // Fill each exceptional sample with the mean phase of its regular neighbours.
    for &k in &interpolated {
        let left = (0..k).rev().find(|j| !interpolated.contains(j));
        let right = (k + 1..n).find(|j| !interpolated.contains(j));
        s[k] = match (left, right) {
            (Some(a), Some(b)) => {
                let step = (s[b] / s[a]).arg();
                let t = T::from_usize_lossy(k - a) / T::from_usize_lossy(b - a);
                s[a] * C::from_polar(T::one(), step * t)
            }
            (Some(a), None) => s[a],
            (None, Some(b)) => s[b],
            (None, None) => creal(T::one()),
        };
    }
    let exceptional_points = interpolated.iter().map(|&k| grid.x(k)).collect();

    let h = grid.half_len();
    let mut s_even = Vec::with_capacity(h);
    let mut s_odd = Vec::with_capacity(h);
    for j in 0..h {
        let pos = s[h + j];
        let neg = s[h - 1 - j];
        s_even.push((pos + neg) * T::half());
        s_odd.push((pos - neg) * T::half());
    }

    let unwrapped_phase = unwrap_phase(&s);
    let winding = check_turns_resolved(&d, &potential.u.values, &interpolated, grid, config)
        .and_then(|()| winding_number_with(&s, grid, creal(T::one()), config));
    let (winding, winding_failure, winding_error) = match winding {
        Ok(w) => (Some(w), None, None),
        Err(e) => (None, Some(e.to_string()), Some(e)),
    };
    Ok(ScatteringData {
        grid,
        s,
        s_even,
        s_odd,
        unwrapped_phase,
        winding,
        winding_failure,
        winding_error,
        exceptional_points,
        interpolated,
    })
}

/// `S = conj(D)/D`, so a phase step of `D = 1 - I₊` near `±π` between two
/// samples is a full turn of `S` that the samples alias away. Inside the zero
/// set of `u` that is an eigenvalue and `S` does not move; anywhere else the
/// grid is too coarse.
fn check_turns_resolved<T: Real>(
    d: &[C<T>],
    u: &[C<T>],
    interpolated: &[usize],
    grid: UniformGrid<T>,
    config: WindingConfig,
) -> Result<()> {
    let tol = T::lit(crate::spectrum::ZERO_TOLERANCE) * u.iter().fold(T::zero(), |a, z| a.max(z.norm()));
    for k in 0..d.len() - 1 {
        if u[k].norm() <= tol && u[k + 1].norm() <= tol {
            continue;
        }
        if interpolated.contains(&k) || interpolated.contains(&(k + 1)) {
            continue;
        }
        let step = (d[k + 1] / d[k]).arg().to_f64_lossy();
        if step.abs() >= config.max_phase_step {
            return Err(Error::UnresolvedTurn {
                x: grid.x(k).to_f64_lossy(),
                step,
            });
        }
    }
    Ok(())
}

/// Continuous phase: `arg S_0` followed by the principal arguments of
/// successive ratios.
pub fn unwrap_phase<T: Real>(s: &[C<T>]) -> Vec<T> {
    let mut out = Vec::with_capacity(s.len());
    let Some(first) = s.first() else {
        return out;
    };
    let mut acc = first.arg();
    out.push(acc);
    for pair in s.windows(2) {
        acc = acc + (pair[1] / pair[0]).arg();
        out.push(acc);
    }
    out
}

/// Winding number of the closed curve `endpoint → S(x_0) → … → S(x_{N-1}) →
/// endpoint`, counted positive counterclockwise.
pub fn winding_number<T: Real>(s: &[C<T>], grid: UniformGrid<T>, endpoint_value: C<T>) -> Result<i64> {
    winding_number_with(s, grid, endpoint_value, WindingConfig::default())
}

pub fn winding_number_with<T: Real>(
    s: &[C<T>],
    grid: UniformGrid<T>,
    endpoint_value: C<T>,
    config: WindingConfig,
) -> Result<i64> {
    if s.len() != grid.len() {
        return Err(Error::Dimension {
            expected: grid.len(),
            found: s.len(),
        });
    }
    for (k, z) in s.iter().enumerate() {
        let deviation = Float::abs(z.norm() - T::one()).to_f64_lossy();
        if !(deviation <= config.unimodular_tolerance) {
            return Err(Error::NotUnimodular {
                x: grid.x(k).to_f64_lossy(),
                deviation,
            });
        }
    }
    let n = s.len();
    for (side, z) in [("left", s[0]), ("right", s[n - 1])] {
        let deviation = (z - endpoint_value).norm().to_f64_lossy();
        if !(deviation <= config.endpoint_tolerance) {
            return Err(Error::EndpointDeviation {
                side,
                deviation,
                limit: config.endpoint_tolerance,
            });
        }
    }
    let mut open = 0.0;
    for k in 0..n - 1 {
        let step = (s[k + 1] / s[k]).arg().to_f64_lossy();
        if step.abs() >= config.max_phase_step {
            return Err(Error::PhaseStep {
                x: grid.x(k).to_f64_lossy(),
                step,
                limit: config.max_phase_step,
            });
        }
        open += step;
    }
    let enter = (s[0] / endpoint_value).arg().to_f64_lossy();
    let leave = (endpoint_value / s[n - 1]).arg().to_f64_lossy();
    let closed = (enter + open + leave) / (2.0 * PI);
    let winding = closed.round();
    let turns = open / (2.0 * PI);
    if (turns - winding).abs() > config.integer_tolerance || (closed - winding).abs() > 1e-6 {
        return Err(Error::NonIntegerWinding {
            turns,
            limit: config.integer_tolerance,
        });
    }
    Ok(winding as i64)
}

/// `-Δ arg(1 - I₊)/π`, an independent estimate of the winding of `S`.
///
/// Since `S = conj(D)/D` with `D = 1 - I₊`, `arg S = -2 arg D`.
pub fn winding_from_denominator<T: Real>(bv: &BoundaryValues<T>) -> f64 {
    let d = denominator(bv);
    let phase = unwrap_phase(&d);
    let total = (phase[phase.len() - 1] - phase[0]).to_f64_lossy();
    -total / PI
}

/// `ψ = ū/(1 - I₊)` with exceptional points masked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PsiWeight<T: Real> {
    pub grid: UniformGrid<T>,
    /// Zero at masked points.
    pub values: Vec<C<T>>,
    pub mask: Vec<bool>,
}

impl<T: Real> PsiWeight<T> {
    /// Discrete L² norm over the unmasked points.
    pub fn norm(&self) -> T {
        let mut acc = T::zero();
        for (v, &m) in self.values.iter().zip(&self.mask) {
            if !m {
                acc = acc + v.norm_sqr();
            }
        }
        (acc * self.grid.step()).sqrt()
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

pub fn psi_weight<T: Real>(potential: &SampledPotential<T>, bv: &BoundaryValues<T>) -> Result<PsiWeight<T>> {
    check_inputs(potential, bv)?;
    let d = denominator(bv);
    let tiny = T::lit(SINGULAR_DENOMINATOR);
    let mut values = Vec::with_capacity(d.len());
    let mut mask = Vec::with_capacity(d.len());
    for (u, dk) in potential.u.values.iter().zip(&d) {
        if dk.norm() <= tiny {
            values.push(creal(T::zero()));
            mask.push(true);
        } else {
            values.push(u.conj() / dk);
            mask.push(false);
        }
    }
    Ok(PsiWeight {
        grid: bv.grid,
        values,
        mask,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cauchy::boundary_values;
    use crate::potential::{sample_potential, PotentialSpec};

    fn pipeline(
        spec: PotentialSpec<f64>,
        l: f64,
        n: usize,
    ) -> (SampledPotential<f64>, BoundaryValues<f64>, ScatteringData<f64>) {
        let g = UniformGrid::new(l, n).unwrap();
        let p = sample_potential(&spec, g).unwrap();
        let bv = boundary_values(&p).unwrap();
        let s = scattering_matrix(&p, &bv).unwrap();
        (p, bv, s)
    }

    #[test]
    fn zero_potential_is_trivial() {
        let (p, bv, s) = pipeline(PotentialSpec::zero(), 20.0, 512);
        assert!(s.s.iter().all(|z| *z == C::new(1.0, 0.0)));
        assert!(s.s_even.iter().all(|z| *z == C::new(1.0, 0.0)));
        assert!(s.s_odd.iter().all(|z| z.norm() == 0.0));
        assert_eq!(s.winding, Some(0));
        let psi = psi_weight(&p, &bv).unwrap();
        assert!(psi.values.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn even_potential_at_origin() {
        // With pv(0) = 0, S(0) = (1 - iπ|u(0)|²)/(1 + iπ|u(0)|²). The origin is
        // not a grid point, so compare the two innermost samples with the
        // formula evaluated at their own weights.
        let (p, bv, s) = pipeline(PotentialSpec::gaussian(1.3, 0.0, 1.0), 20.0, 2048);
        let h = 1024;
        let w = p.modulus_squared.values[h].re;
        let pv = bv.pv_part[h];
        let expected = C::new(1.0 - pv, -PI * w) / C::new(1.0 - pv, PI * w);
        assert!((s.s[h] - expected).norm() <= 1e-12);
        // Interpolated to the origin the pv part vanishes.
        let w0: f64 = 1.69;
        let at_zero = C::new(1.0, -PI * w0) / C::new(1.0, PI * w0);
        assert!(
            (s.s_even_at_origin() - at_zero).norm() <= 1e-5,
            "{}",
            s.s_even_at_origin()
        );
    }

    #[test]
    fn strong_gaussian_is_unimodular() {
        let (_, bv, s) = pipeline(PotentialSpec::gaussian(2.0, 0.0, 1.0), 20.0, 2048);
        for (k, z) in s.s.iter().enumerate() {
            assert!((z.norm() - 1.0).abs() <= 1e-10);
            let ratio = (C::new(1.0, 0.0) - bv.i_minus[k]) / (C::new(1.0, 0.0) - bv.i_plus[k]);
            assert!((z - ratio).norm() <= 1e-10);
        }
        let (l, r) = s.endpoint_deviations();
        assert!(l <= 0.05 && r <= 0.05);
        // pv crosses 1 near x = 7.1, where u ≈ 3e-11 is numerically zero: on
        // this grid the tail carries a bound state, and S's compensating turn
        // happens in a window far narrower than Δ.
        assert_eq!(s.winding, Some(-1));
    }

    #[test]
    fn denominator_winding_agrees_for_weak_coupling() {
        let (_, bv, s) = pipeline(PotentialSpec::lorentzian(0.8, 0.5, 0.3), 20.0, 2048);
        assert_eq!(s.winding, Some(0));
        let wd = winding_from_denominator(&bv);
        assert!(wd.abs() < 0.05, "{wd}");
    }

    #[test]
    fn psi_matches_closed_form_at_origin() {
        let (p, bv, _) = pipeline(PotentialSpec::gaussian(1.0, 0.0, 1.0), 20.0, 2048);
        let psi = psi_weight(&p, &bv).unwrap();
        let h = 1024;
        let u = p.u.values[h].re;
        let expected = C::new(u, 0.0) / C::new(1.0 - bv.pv_part[h], PI * u * u);
        assert!((psi.values[h] - expected).norm() <= 1e-14);
        // Modulus bound |ψ| ≤ |u|/|1 - I₊|.
        let d = denominator(&bv);
        for k in 0..p.u.len() {
            assert!(psi.values[k].norm() <= p.u.values[k].norm() / d[k].norm() * (1.0 + 1e-12));
        }
        assert_eq!(psi.masked_count(), 0);
    }

    #[test]
    fn identity_s_minus_one() {
        let (p, bv, s) = pipeline(PotentialSpec::lorentzian(0.8, 0.5, 0.3), 20.0, 2048);
        let psi = psi_weight(&p, &bv).unwrap();
        for k in 0..p.u.len() {
            // S - 1 = -2πi u ψ = -2πi|u|²/(1 - I₊).
            let rhs = C::new(0.0, -2.0 * PI) * p.u.values[k] * psi.values[k];
            assert!((s.s[k] - 1.0 - rhs).norm() <= 1e-10);
        }
    }

    #[test]
    fn cayley_transform_winds_once() {
        let g = UniformGrid::new(20.0, 2048).unwrap();
        let s: Vec<C<f64>> = (0..g.len())
            .map(|k| {
                let x = g.x(k);
                C::new(x, -1.0) / C::new(x, 1.0)
            })
            .collect();
        assert_eq!(winding_number(&s, g, C::new(1.0, 0.0)).unwrap(), 1);
        let back: Vec<C<f64>> = s.iter().map(|z| z.conj()).collect();
        assert_eq!(winding_number(&back, g, C::new(1.0, 0.0)).unwrap(), -1);
        let one = vec![C::new(1.0, 0.0); g.len()];
        assert_eq!(winding_number(&one, g, C::new(1.0, 0.0)).unwrap(), 0);
    }

    #[test]
    fn winding_rejections() {
        let g = UniformGrid::new(2.0, 64).unwrap();
        // Endpoint far from 1.
        let s: Vec<C<f64>> = (0..64).map(|k| C::from_polar(1.0, g.x(k))).collect();
        assert!(matches!(
            winding_number(&s, g, C::new(1.0, 0.0)),
            Err(Error::EndpointDeviation { .. })
        ));
        // Not unimodular.
        let mut t = vec![C::new(1.0, 0.0); 64];
        t[10] = C::new(1.1, 0.0);
        assert!(matches!(
            winding_number(&t, g, C::new(1.0, 0.0)),
            Err(Error::NotUnimodular { .. })
        ));
        // Coarse: the phase jumps by 3 rad between neighbours.
        let mut u = vec![C::new(1.0, 0.0); 64];
        for (k, z) in u.iter_mut().enumerate().skip(32) {
            *z = C::from_polar(1.0, 3.0 * ((k - 31) as f64).min(1.0));
        }
        u[63] = C::new(1.0, 0.0);
        assert!(matches!(
            winding_number(&u, g, C::new(1.0, 0.0)),
            Err(Error::PhaseStep { .. })
        ));
    }

    #[test]
    fn half_winding_is_not_rounded() {
        // Half a turn with both ends inside the endpoint tolerance of -1: the
        // closed total is an integer but the open one is not.
        let g = UniformGrid::new(2.0, 256).unwrap();
        let s: Vec<C<f64>> = (0..256).map(|k| C::from_polar(1.0, PI * k as f64 / 255.0)).collect();
        let r = winding_number_with(
            &s,
            g,
            C::new(1.0, 0.0),
            WindingConfig {
                endpoint_tolerance: 2.5,
                ..WindingConfig::default()
            },
        );
        assert!(matches!(r, Err(Error::NonIntegerWinding { .. })), "{r:?}");
    }

    #[test]
    fn csv_has_four_columns() {
        let (_, _, s) = pipeline(PotentialSpec::gaussian(0.3, 0.0, 1.0), 20.0, 256);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,re_s,im_s,phase"));
        assert_eq!(lines.count(), 256);
    }
}
