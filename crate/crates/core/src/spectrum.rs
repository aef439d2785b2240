//! Eigenvalues of `H_u = X + ⟨u,·⟩u` and the exceptional set `{I₊ = 1}`.
//!
//! `λ` is an eigenvalue when `u(λ) = 0` and `g(λ) = 1 - PV∫|u(y)|²/(λ-y) dy`
//! vanishes. Roots of `g` are bracketed on the numerical zero set of `u` and
//! bisected with the off-grid principal value.

use std::io::Write;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::cauchy::{boundary_values, pv_at, BoundaryValues};
use crate::error::{Error, Result};
use crate::grid::{SampledFunction, UniformGrid};
use crate::io;
use crate::potential::{holder_exponent_estimate, sample_potential, PotentialSpec, SampledPotential};
use crate::scalar::{Real, C};
use crate::scattering::{scattering_matrix, SINGULAR_DENOMINATOR};
use crate::waveop::grid_hamiltonian;

/// Membership in the zero set: `|u| ≤ ZERO_TOLERANCE·max|u|`.
pub const ZERO_TOLERANCE: f64 = 1e-10;
/// Bisection stops once the bracket is this narrow.
pub const BISECTION_WIDTH: f64 = 1e-10;
/// Eigenvalues need `|1 - pv(λ)|` below this.
pub const ROOT_RESIDUAL: f64 = 1e-8;
/// Eigenvalues need `|u(λ)|` below this times `max|u|`.
pub const ZERO_RESIDUAL: f64 = 1e-8;
/// Local Hölder exponents at or below this get flagged.
pub const HOLDER_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig {
    pub zero_tolerance: f64,
    pub bisection_width: f64,
    /// Window radius for the local Hölder fit at each eigenvalue.
    pub holder_radius: f64,
    /// `|1 - I₊|` below which a root of `1 - pv` counts as exceptional.
    pub exceptional_tolerance: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            zero_tolerance: ZERO_TOLERANCE,
            bisection_width: BISECTION_WIDTH,
            holder_radius: 0.5,
            exceptional_tolerance: SINGULAR_DENOMINATOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Eigenvalue<T: Real> {
    pub lambda: T,
    /// `|u(λ)|`
    pub residual_u: T,
    /// `|1 - pv(λ)|`
    pub residual_root: T,
    /// `None` when `u` is flat around `λ` and no exponent can be fitted.
    pub local_holder: Option<T>,
    pub holder_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EigenvalueReport<T: Real> {
    pub eigenvalues: Vec<Eigenvalue<T>>,
    pub exceptional: Vec<T>,
    pub count: usize,
    /// Components of the zero set, with edges located between samples.
    pub zero_set: Vec<(T, T)>,
    /// Components of the zero set on which `1 - pv` has no root.
    pub non_eigenvalue_zeros: Vec<(T, T)>,
    /// Bisection limits that failed the residual checks.
    pub rejected: Vec<T>,
}

/// One connected run of samples with `|u| ≤ tol`.
#[derive(Debug, Clone, Copy)]
struct Component<T> {
    first: usize,
    last: usize,
    lo: T,
    hi: T,
}

struct Evaluator<'a, T: Real> {
    grid: UniformGrid<T>,
    u: &'a SampledFunction<T>,
    w: Vec<T>,
}

impl<T: Real> Evaluator<'_, T> {
    fn g(&self, x: T) -> Result<T> {
        Ok(T::one() - pv_at(self.grid, &self.w, x)?)
    }

    fn abs_u(&self, x: T) -> T {
        self.u.cubic_at(x).norm()
    }

    fn w_at(&self, x: T) -> T {
        let values: Vec<C<T>> = self.w.iter().map(|&v| C::new(v, T::zero())).collect();
        crate::interp::cubic(&values, self.grid.x(0), self.grid.step(), x).re
    }

    /// Last point of `[inside, outside]` where `|u| ≤ tol`, by bisection on
    /// the interpolated modulus.
    fn zero_edge(&self, inside: T, outside: T, tol: T) -> T {
        let (mut a, mut b) = (inside, outside);
        for _ in 0..60 {
            let m = (a + b) * T::half();
            if self.abs_u(m) <= tol {
                a = m;
            } else {
                b = m;
            }
        }
        a
    }

    fn bisect(&self, mut a: T, mut b: T, mut ga: T, width: T) -> Result<T> {
        while Float::abs(b - a) > width {
            let m = (a + b) * T::half();
            let gm = self.g(m)?;
            if gm == T::zero() {
                return Ok(m);
            }
            if (gm < T::zero()) == (ga < T::zero()) {
                a = m;
                ga = gm;
            } else {
                b = m;
            }
        }
        Ok((a + b) * T::half())
    }
}

/// Root of `g` in `[a, b]` given the end values. A zero at `b` is left to the
/// next pair unless this is the last one.
fn bracket_root<T: Real>(ev: &Evaluator<'_, T>, a: (T, T), b: (T, T), last: bool, width: T) -> Result<Option<T>> {
    let ((xa, ga), (xb, gb)) = (a, b);
    if ga == T::zero() {
        return Ok(Some(xa));
    }
    if gb == T::zero() {
        return Ok(last.then_some(xb));
    }
    if (ga < T::zero()) == (gb < T::zero()) {
        return Ok(None);
    }
    ev.bisect(xa, xb, ga, width).map(Some)
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

fn zero_components<T: Real>(ev: &Evaluator<'_, T>, tol: T) -> Vec<Component<T>> {
    let n = ev.grid.len();
    let in_zero: Vec<bool> = ev.u.values.iter().map(|z| z.norm() <= tol).collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < n {
        if !in_zero[k] {
            k += 1;
            continue;
        }
        let first = k;
        while k + 1 < n && in_zero[k + 1] {
            k += 1;
        }
        let last = k;
        let lo = if first == 0 {
            ev.grid.x(0)
        } else {
            ev.zero_edge(ev.grid.x(first), ev.grid.x(first - 1), tol)
        };
        let hi = if last == n - 1 {
            ev.grid.x(n - 1)
        } else {
            ev.zero_edge(ev.grid.x(last), ev.grid.x(last + 1), tol)
        };
        out.push(Component { first, last, lo, hi });
        k += 1;
    }
    out
}

/// Sample points of a component: the located edges and the grid points
/// between them, with `g` at each.
fn component_samples<T: Real>(ev: &Evaluator<'_, T>, bv: &BoundaryValues<T>, c: Component<T>) -> Result<Vec<(T, T)>> {
    let mut pts = Vec::with_capacity(c.last - c.first + 3);
    if c.lo < ev.grid.x(c.first) {
        pts.push((c.lo, ev.g(c.lo)?));
    }
    for k in c.first..=c.last {
        pts.push((ev.grid.x(k), T::one() - bv.pv_part[k]));
    }
    if c.hi > ev.grid.x(c.last) {
        pts.push((c.hi, ev.g(c.hi)?));
    }
    Ok(pts)
}

pub fn eigenvalue_search<T: Real>(
    potential: &SampledPotential<T>,
    bv: &BoundaryValues<T>,
) -> Result<EigenvalueReport<T>> {
    eigenvalue_search_with(potential, bv, SpectrumConfig::default())
}

pub fn eigenvalue_search_with<T: Real>(
    potential: &SampledPotential<T>,
    bv: &BoundaryValues<T>,
    config: SpectrumConfig,
) -> Result<EigenvalueReport<T>> {
    check_inputs(potential, bv)?;
    let grid = bv.grid;
    let n = grid.len();
    let ev = Evaluator {
        grid,
        u: &potential.u,
        w: potential.weight(),
    };
    let umax = potential.u.max_abs();
    let tol = T::lit(config.zero_tolerance) * umax;
    let width = T::lit(config.bisection_width);
    let components = zero_components(&ev, tol);

    let mut eigenvalues = Vec::new();
    let mut rejected = Vec::new();
    let mut non_eigenvalue_zeros = Vec::new();
    for c in &components {
        for (k, edge) in [(c.first, 0usize), (c.last, n - 1)] {
            if k == edge {
                let g = T::one() - bv.pv_part[k];
                if g <= T::zero() {
                    return Err(Error::Spectrum(format!(
                        "zero set reaches the grid end x = {} where 1 - pv = {g:e} ≤ 0; a root may lie beyond L = {}",
                        grid.x(k),
                        grid.half_width()
                    )));
                }
            }
        }
        let pts = component_samples(&ev, bv, *c)?;
        let mut found = false;
        for (i, pair) in pts.windows(2).enumerate() {
            let last_pair = i + 2 == pts.len();
            let Some(lambda) = bracket_root(&ev, pair[0], pair[1], last_pair, width)? else {
                continue;
            };
            let residual_u = ev.abs_u(lambda);
            let residual_root = Float::abs(ev.g(lambda)?);
            if residual_u > T::lit(ZERO_RESIDUAL) * umax || residual_root > T::lit(ROOT_RESIDUAL) {
                rejected.push(lambda);
                continue;
            }
            let l = grid.half_width();
            let radius = T::lit(config.holder_radius).min(l - Float::abs(lambda) - grid.step());
            let local_holder = if radius > T::zero() {
                holder_exponent_estimate(&potential.u, lambda, radius)
                    .ok()
                    .map(|h| h.exponent)
            } else {
                None
            };
            let holder_warning = local_holder.is_some_and(|a| a <= T::lit(HOLDER_THRESHOLD));
            eigenvalues.push(Eigenvalue {
                lambda,
                residual_u,
                residual_root,
                local_holder,
                holder_warning,
            });
            found = true;
        }
        if !found {
            non_eigenvalue_zeros.push((c.lo, c.hi));
        }
    }
    let exceptional = exceptional_with(&ev, bv, &components, tol, width, T::lit(config.exceptional_tolerance))?;
    Ok(EigenvalueReport {
        count: eigenvalues.len(),
        eigenvalues,
        exceptional,
        zero_set: components.iter().map(|c| (c.lo, c.hi)).collect(),
        non_eigenvalue_zeros,
        rejected,
    })
}

/// Points outside the zero set where `|1 - I₊|` drops below the tolerance.
pub fn exceptional_points<T: Real>(potential: &SampledPotential<T>, bv: &BoundaryValues<T>) -> Result<Vec<T>> {
    exceptional_points_with(potential, bv, SpectrumConfig::default())
}

pub fn exceptional_points_with<T: Real>(
    potential: &SampledPotential<T>,
    bv: &BoundaryValues<T>,
    config: SpectrumConfig,
) -> Result<Vec<T>> {
    check_inputs(potential, bv)?;
    let ev = Evaluator {
        grid: bv.grid,
        u: &potential.u,
        w: potential.weight(),
    };
    let tol = T::lit(config.zero_tolerance) * potential.u.max_abs();
    let components = zero_components(&ev, tol);
    exceptional_with(
        &ev,
        bv,
        &components,
        tol,
        T::lit(config.bisection_width),
        T::lit(config.exceptional_tolerance),
    )
}

fn exceptional_with<T: Real>(
    ev: &Evaluator<'_, T>,
    bv: &BoundaryValues<T>,
    components: &[Component<T>],
    tol: T,
    width: T,
    limit: T,
) -> Result<Vec<T>> {
    let grid = ev.grid;
    let inside_zero = |x: T| components.iter().any(|c| x >= c.lo && x <= c.hi);
    let mut out = Vec::new();
    // Re(1 - I₊) changes sign; Im(1 - I₊) = π|u|² ≥ 0 only touches zero.
    for k in 0..grid.len() - 1 {
        let a = (grid.x(k), T::one() - bv.pv_part[k]);
        let b = (grid.x(k + 1), T::one() - bv.pv_part[k + 1]);
        let Some(x) = bracket_root(ev, a, b, k + 2 == grid.len(), width)? else {
            continue;
        };
        if inside_zero(x) || ev.abs_u(x) <= tol {
            continue;
        }
        let re = ev.g(x)?;
        let im = T::PI() * ev.w_at(x).max(T::zero());
        if (re * re + im * im).sqrt() <= limit {
            out.push(x);
        }
    }
    Ok(out)
}

/// `1 / sup_Z pv`: the coupling `g` at which `√g·u` acquires its first
/// eigenvalue. `None` when `pv ≤ 0` on the whole zero set.
pub fn numerical_threshold<T: Real>(potential: &SampledPotential<T>, bv: &BoundaryValues<T>) -> Result<Option<T>> {
    check_inputs(potential, bv)?;
    let ev = Evaluator {
        grid: bv.grid,
        u: &potential.u,
        w: potential.weight(),
    };
    let tol = T::lit(ZERO_TOLERANCE) * potential.u.max_abs();
    let mut sup = T::zero();
    for c in zero_components(&ev, tol) {
        for (_, g) in component_samples(&ev, bv, c)? {
            sup = sup.max(T::one() - g);
        }
    }
    Ok((sup > T::zero()).then(|| sup.recip()))
}

/// `‖(H_u^grid - λ)f_λ‖/‖f_λ‖` for `f_λ(x) = u(x)/(λ - x)`.
pub fn eigenvector_residual<T: Real>(potential: &SampledPotential<T>, lambda: T) -> Result<T> {
    let grid = potential.grid();
    let f: Vec<C<T>> = potential
        .u
        .values
        .iter()
        .enumerate()
        .map(|(k, &u)| u / (lambda - grid.x(k)))
        .collect();
    if f.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Spectrum(format!(
            "eigenvector candidate at λ = {lambda} is not square summable on the grid"
        )));
    }
    let h = grid_hamiltonian(&potential.u);
    let hf = h.matvec(&f)?;
    let mut num = T::zero();
    let mut den = T::zero();
    for (a, b) in hf.iter().zip(&f) {
        num = num + (a - b * lambda).norm_sqr();
        den = den + b.norm_sqr();
    }
    if den == T::zero() {
        return Err(Error::Spectrum(format!(
            "eigenvector candidate at λ = {lambda} vanishes"
        )));
    }
    Ok((num / den).sqrt())
}

/// One row of a coupling sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SweepRow<T: Real> {
    pub g: T,
    pub n: usize,
    /// `None` when the winding was rejected.
    pub omega: Option<i64>,
    pub winding_failure: Option<String>,
    /// `N` differs from the previous row.
    pub threshold: bool,
    pub exceptional: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SweepTable<T: Real> {
    pub rows: Vec<SweepRow<T>>,
    /// Consecutive couplings between which `N` jumps.
    pub thresholds: Vec<(T, T)>,
    /// `N(g)` never decreases along the sweep.
    pub monotone: bool,
    /// Every row has `ω = -N`.
    pub levinson: bool,
}

impl<T: Real> SweepTable<T> {
    /// Writes `g, N, omega, threshold`; a rejected winding is written as NaN.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows = self.rows.iter().map(|r| {
            vec![
                r.g.to_f64_lossy(),
                r.n as f64,
                r.omega.map_or(f64::NAN, |w| w as f64),
                if r.threshold { 1.0 } else { 0.0 },
            ]
        });
        io::write_csv(out, &["g", "N", "omega", "threshold"], rows)
    }
}

pub fn coupling_sweep<T: Real>(
    spec: &PotentialSpec<T>,
    grid: UniformGrid<T>,
    couplings: &[T],
) -> Result<SweepTable<T>> {
    if couplings.is_empty() || couplings.iter().any(|&g| !(g > T::zero())) {
        return Err(Error::Spectrum("sweep couplings must be positive and non-empty".into()));
    }
    if couplings.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Spectrum("sweep couplings must be strictly increasing".into()));
    }
    let mut rows: Vec<SweepRow<T>> = Vec::with_capacity(couplings.len());
    for &g in couplings {
        let potential = sample_potential(&spec.with_coupling(g), grid)?;
        let bv = boundary_values(&potential)?;
        let s = scattering_matrix(&potential, &bv)?;
        let report = eigenvalue_search(&potential, &bv)?;
        let threshold = rows.last().is_some_and(|r| r.n != report.count);
        rows.push(SweepRow {
            g,
            n: report.count,
            omega: s.winding,
            winding_failure: s.winding_failure,
            threshold,
            exceptional: report.exceptional,
        });
    }
    let thresholds = rows
        .windows(2)
        .filter(|w| w[1].threshold)
        .map(|w| (w[0].g, w[1].g))
        .collect();
    let monotone = rows.windows(2).all(|w| w[1].n >= w[0].n);
    let levinson = rows.iter().all(|r| r.omega == Some(-(r.n as i64)));
    Ok(SweepTable {
        rows,
        thresholds,
        monotone,
        levinson,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cauchy::boundary_values;

    fn run(
        spec: PotentialSpec<f64>,
        l: f64,
        n: usize,
    ) -> (SampledPotential<f64>, BoundaryValues<f64>, EigenvalueReport<f64>) {
        let g = UniformGrid::new(l, n).unwrap();
        let p = sample_potential(&spec, g).unwrap();
        let bv = boundary_values(&p).unwrap();
        let r = eigenvalue_search(&p, &bv).unwrap();
        (p, bv, r)
    }

    /// `g*` for `c(1-x²)²` on `[-1, 1]`: `g*c²·∫(1-y)³(1+y)⁴dy = 1`, and the
    /// integral is `2⁸·B(4,5) = 32/35`.
    fn bump_threshold(c: f64) -> f64 {
        35.0 / 32.0 / (c * c)
    }

    #[test]
    fn zero_potential_has_no_eigenvalues() {
        let (_, _, r) = run(PotentialSpec::zero(), 10.0, 512);
        assert_eq!(r.count, 0);
        assert!(r.exceptional.is_empty());
    }

    #[test]
    fn positive_gaussian_has_no_eigenvalues() {
        let (_, _, r) = run(PotentialSpec::gaussian(1.0, 0.0, 1.0), 20.0, 2048);
        assert_eq!(r.count, 0);
        assert!(r.exceptional.is_empty());
    }

    #[test]
    fn strong_bump_has_one_eigenvalue_right_of_the_support() {
        let c = (4.0 * bump_threshold(1.0)).sqrt();
        let (p, _, r) = run(PotentialSpec::bump(c, -1.0, 1.0, 2.0), 20.0, 2048);
        assert_eq!(r.count, 1, "{r:?}");
        let e = &r.eigenvalues[0];
        assert!(e.lambda > 1.0);
        assert!(e.residual_root <= 1e-8 && e.residual_u <= 1e-8 * c);
        assert!(!e.holder_warning);
        assert!(eigenvector_residual(&p, e.lambda).unwrap() <= 1e-3);
    }

    #[test]
    fn weak_bump_has_none() {
        let c = (0.25 * bump_threshold(1.0)).sqrt();
        let (_, _, r) = run(PotentialSpec::bump(c, -1.0, 1.0, 2.0), 20.0, 2048);
        assert_eq!(r.count, 0);
        assert!(!r.non_eigenvalue_zeros.is_empty());
    }

    #[test]
    fn weak_gaussian_has_no_exceptional_points() {
        let g = UniformGrid::new(20.0, 2048).unwrap();
        let p = sample_potential(&PotentialSpec::gaussian(0.2, 0.0, 1.0), g).unwrap();
        let bv = boundary_values(&p).unwrap();
        let sup = bv.i_plus.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(sup < 1.0);
        assert!(exceptional_points(&p, &bv).unwrap().is_empty());
    }

    #[test]
    fn threshold_matches_the_closed_form() {
        let g = UniformGrid::new(20.0, 2048).unwrap();
        let p = sample_potential(&PotentialSpec::bump(1.0, -1.0, 1.0, 2.0), g).unwrap();
        let bv = boundary_values(&p).unwrap();
        // The support edge is only located to within a cell, and pv falls off
        // with slope ≈ -1.22 past it.
        let t = numerical_threshold(&p, &bv).unwrap().unwrap();
        let edge_error = 1.22 * g.step() * t * t;
        assert!((t - 35.0 / 32.0).abs() <= edge_error, "{t}");
        let zero = sample_potential(&PotentialSpec::zero(), g).unwrap();
        let bv0 = boundary_values(&zero).unwrap();
        assert_eq!(numerical_threshold(&zero, &bv0).unwrap(), None);
    }

    #[test]
    fn exceptional_point_appears_at_the_support_edge_near_threshold() {
        // Just below threshold the outer root of 1 - pv sits inside the
        // support, where u is tiny but nonzero.
        let g = UniformGrid::new(4.0, 8192).unwrap();
        let spec = PotentialSpec::bump(1.0, -1.0, 1.0, 2.0);
        let p = sample_potential(&spec, g).unwrap();
        let bv = boundary_values(&p).unwrap();
        let gstar = numerical_threshold(&p, &bv).unwrap().unwrap();
        let p = sample_potential(&spec.with_coupling(gstar * (1.0 - 1e-3)), g).unwrap();
        let bv = boundary_values(&p).unwrap();
        let r = eigenvalue_search(&p, &bv).unwrap();
        assert_eq!(r.count, 0);
        assert_eq!(r.exceptional.len(), 1, "{:?}", r.exceptional);
        assert!((r.exceptional[0] - 1.0).abs() <= 1e-3, "{}", r.exceptional[0]);
    }

    #[test]
    fn sweep_jumps_once_and_satisfies_levinson() {
        let g = UniformGrid::new(20.0, 1024).unwrap();
        let gs = bump_threshold(1.0);
        let couplings = [0.1 * gs, 0.5 * gs, 1.1 * gs, 2.0 * gs, 4.0 * gs];
        let t = coupling_sweep(&PotentialSpec::bump(1.0, -1.0, 1.0, 2.0), g, &couplings).unwrap();
        let ns: Vec<usize> = t.rows.iter().map(|r| r.n).collect();
        assert_eq!(ns, [0, 0, 1, 1, 1]);
        assert_eq!(t.thresholds, vec![(0.5 * gs, 1.1 * gs)]);
        assert!(t.monotone && t.levinson);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("g,N,omega,threshold\n"));
        assert!(coupling_sweep(&PotentialSpec::bump(1.0, -1.0, 1.0, 2.0), g, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn sub_grid_turn_below_threshold_is_rejected_not_miscounted() {
        // At 0.9·g* the outer root of 1 - pv sits just inside the support,
        // where |u|² ≈ 4e-4: S turns once within ~1e-3, far below Δ.
        let g = UniformGrid::new(20.0, 1024).unwrap();
        let t = coupling_sweep(
            &PotentialSpec::bump(1.0, -1.0, 1.0, 2.0),
            g,
            &[0.9 * bump_threshold(1.0)],
        )
        .unwrap();
        assert_eq!(t.rows[0].n, 0);
        assert_eq!(t.rows[0].omega, None);
        assert!(t.rows[0]
            .winding_failure
            .as_deref()
            .unwrap()
            .contains("refine the grid"));
        assert!(!t.levinson);
    }

    #[test]
    fn root_beyond_the_box_is_rejected() {
        // ‖u‖²/L > 1 pushes the tail root of 1 - pv past the box edge.
        let g = UniformGrid::new(3.0, 512).unwrap();
        let p = sample_potential(&PotentialSpec::bump(3.0, -1.0, 1.0, 2.0), g).unwrap();
        let bv = boundary_values(&p).unwrap();
        assert!(matches!(eigenvalue_search(&p, &bv), Err(Error::Spectrum(_))));
    }
}
