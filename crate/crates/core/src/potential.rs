//! The coupling function `u` of `H_u = X + ⟨u,·⟩u`: built-in shapes, tabulated
//! samples, and a Hölder-regularity diagnostic.

use std::path::{Path, PathBuf};

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{SampledFunction, UniformGrid};
use crate::scalar::{cplx, Real, C};

/// Largest admissible `|u(±L)| / max|u|` for the built-in shapes.
pub const EDGE_DECAY: f64 = 1e-3;

/// Shape of the potential. Amplitudes live in [`PotentialSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "")]
pub enum PotentialKind<T: Real> {
    /// `u ≡ 0`. The amplitude is ignored.
    Zero,
    /// `c·exp(-(x-x₀)²/(2w²))`
    Gaussian { center: T, width: T },
    /// `c·w²/((x-x₀)² + w²)`
    Lorentzian { center: T, width: T },
    /// `c·(1 - ((2x-a-b)/(b-a))²)^p` on `[a, b]`, zero outside.
    BumpPower { a: T, b: T, power: T },
    /// Samples read from a CSV file `x, re[, im]` and resampled by cubic
    /// interpolation; zero outside the tabulated range.
    Table { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PotentialSpec<T: Real> {
    #[serde(flatten)]
    pub kind: PotentialKind<T>,
    #[serde(default = "one")]
    pub amplitude: T,
}

fn one<T: Real>() -> T {
    T::one()
}

impl<T: Real> PotentialSpec<T> {
    pub fn zero() -> Self {
        Self {
            kind: PotentialKind::Zero,
            amplitude: T::one(),
        }
    }

    pub fn gaussian(amplitude: T, center: T, width: T) -> Self {
        Self {
            kind: PotentialKind::Gaussian { center, width },
            amplitude,
        }
    }

    pub fn lorentzian(amplitude: T, center: T, width: T) -> Self {
        Self {
            kind: PotentialKind::Lorentzian { center, width },
            amplitude,
        }
    }

    pub fn bump(amplitude: T, a: T, b: T, power: T) -> Self {
        Self {
            kind: PotentialKind::BumpPower { a, b, power },
            amplitude,
        }
    }

    pub fn table(path: impl Into<PathBuf>, amplitude: T) -> Self {
        Self {
            kind: PotentialKind::Table { path: path.into() },
            amplitude,
        }
    }

    /// `√g·u`: the same shape at coupling `g`.
    pub fn with_coupling(&self, g: T) -> Self {
        Self {
            kind: self.kind.clone(),
            amplitude: self.amplitude * g.sqrt(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, PotentialKind::Zero)
    }

    /// Checks parameters, without touching the file system.
    pub fn validate(&self) -> Result<()> {
        if self.is_zero() {
            return Ok(());
        }
        if !(self.amplitude > T::zero()) || !self.amplitude.is_finite() {
            return Err(Error::Potential(format!(
                "amplitude must be positive and finite, got {}",
                self.amplitude
            )));
        }
        match &self.kind {
            PotentialKind::Gaussian { width, .. } | PotentialKind::Lorentzian { width, .. } => {
                if !(*width > T::zero()) {
                    return Err(Error::Potential(format!("width must be positive, got {width}")));
                }
            }
            PotentialKind::BumpPower { a, b, power } => {
                if !(*b > *a) {
                    return Err(Error::Potential(format!("bump support needs a < b, got [{a}, {b}]")));
                }
                if !(*power > T::zero()) {
                    return Err(Error::Potential(format!("bump power must be positive, got {power}")));
                }
            }
            PotentialKind::Zero | PotentialKind::Table { .. } => {}
        }
        Ok(())
    }

    /// Closed-form value at `x`. `None` for tables.
    pub fn eval(&self, x: T) -> Option<T> {
        let c = self.amplitude;
        Some(match &self.kind {
            PotentialKind::Zero => T::zero(),
            PotentialKind::Gaussian { center, width } => {
                let t = (x - *center) / *width;
                c * (-t * t * T::half()).exp()
            }
            PotentialKind::Lorentzian { center, width } => {
                let d = x - *center;
                c * *width * *width / (d * d + *width * *width)
            }
            PotentialKind::BumpPower { a, b, power } => {
                if x <= *a || x >= *b {
                    T::zero()
                } else {
                    let t = (T::two() * x - *a - *b) / (*b - *a);
                    c * (T::one() - t * t).powf(*power)
                }
            }
            PotentialKind::Table { .. } => return None,
        })
    }
}

/// `u` on a grid, with `|u|²` alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SampledPotential<T: Real> {
    pub u: SampledFunction<T>,
    pub modulus_squared: SampledFunction<T>,
    /// Non-fatal findings, such as an edge power below one.
    pub warnings: Vec<String>,
}

impl<T: Real> SampledPotential<T> {
    /// Wraps samples that did not come from a spec.
    pub fn from_samples(u: SampledFunction<T>) -> Self {
        let modulus_squared = u.modulus_squared();
        Self {
            u,
            modulus_squared,
            warnings: Vec::new(),
        }
    }

    pub fn grid(&self) -> UniformGrid<T> {
        self.u.grid
    }

    /// `|u|²` as plain reals.
    pub fn weight(&self) -> Vec<T> {
        self.modulus_squared.values.iter().map(|z| z.re).collect()
    }
}

pub fn sample_potential<T: Real>(spec: &PotentialSpec<T>, grid: UniformGrid<T>) -> Result<SampledPotential<T>> {
    spec.validate()?;
    let mut warnings = Vec::new();
    let u = match &spec.kind {
        PotentialKind::Table { path } => {
            let table = read_table::<T>(path)?;
            let step = table.min_step();
            if step > grid.step() * T::lit(1.0 + 1e-9) {
                warnings.push(format!(
                    "table {} is coarser than the grid (spacing {step} > {})",
                    path.display(),
                    grid.step()
                ));
            }
            SampledFunction::from_fn(grid, |x| table.cubic(x) * spec.amplitude)
        }
        _ => {
            if let PotentialKind::BumpPower { power, .. } = &spec.kind {
                if *power < T::one() {
                    warnings.push(format!(
                        "bump power {power} < 1: u is only Hölder-{power} at its support edges"
                    ));
                }
            }
            let u = SampledFunction::from_real_fn(grid, |x| spec.eval(x).unwrap_or_else(T::zero));
            let peak = u.max_abs();
            let edge = u.values[0].norm().max(u.values[grid.len() - 1].norm());
            if edge > T::lit(EDGE_DECAY) * peak {
                return Err(Error::Potential(format!(
                    "|u(±L)| = {edge:e} exceeds {EDGE_DECAY:e}·max|u| = {:e} at L = {}; enlarge L",
                    T::lit(EDGE_DECAY) * peak,
                    grid.half_width()
                )));
            }
            u
        }
    };
    let modulus_squared = u.modulus_squared();
    Ok(SampledPotential {
        u,
        modulus_squared,
        warnings,
    })
}

/// Monotone samples read from disk.
#[derive(Debug, Clone)]
struct Table<T: Real> {
    x: Vec<T>,
    v: Vec<C<T>>,
}

impl<T: Real> Table<T> {
    fn min_step(&self) -> T {
        self.x
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(T::infinity(), |a, b| a.min(b))
    }

    /// Four-point Lagrange interpolation on the (possibly non-uniform) nodes.
    fn cubic(&self, x: T) -> C<T> {
        let n = self.x.len();
        if x < self.x[0] || x > self.x[n - 1] {
            return C::new(T::zero(), T::zero());
        }
        let i = self.x.partition_point(|&t| t <= x).clamp(1, n - 1) - 1;
        if self.x[i] == x {
            return self.v[i];
        }
        let start = i.saturating_sub(1).min(n - 4);
        let mut acc = C::new(T::zero(), T::zero());
        for j in start..start + 4 {
            let mut w = T::one();
            for m in start..start + 4 {
                if m != j {
                    w = w * (x - self.x[m]) / (self.x[j] - self.x[m]);
                }
            }
            acc = acc + self.v[j] * w;
        }
        acc
    }
}

fn read_table<T: Real>(path: &Path) -> Result<Table<T>> {
    let fail = |reason: String| Error::Table {
        path: path.display().to_string(),
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| fail(e.to_string()))?;
    let mut x = Vec::new();
    let mut v = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| fail(e.to_string()))?;
        if record.len() != 2 && record.len() != 3 {
            return Err(fail(format!(
                "row {} has {} columns, expected 2 or 3",
                line + 2,
                record.len()
            )));
        }
        let mut cols = [T::zero(); 3];
        for (k, field) in record.iter().enumerate() {
            let value: f64 = field
                .parse()
                .map_err(|_| fail(format!("row {}: `{field}` is not a number", line + 2)))?;
            cols[k] = T::lit(value);
        }
        if let Some(&last) = x.last() {
            if !(cols[0] > last) {
                return Err(fail(format!(
                    "x must increase strictly; row {} has {} after {last}",
                    line + 2,
                    cols[0]
                )));
            }
        }
        x.push(cols[0]);
        v.push(cplx(cols[1], cols[2]));
    }
    if x.len() < 4 {
        return Err(fail(format!("need at least 4 rows, found {}", x.len())));
    }
    Ok(Table { x, v })
}

const MIN_SEPARATION: usize = 4;

/// Fitted local Hölder exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct HolderEstimate<T: Real> {
    pub exponent: T,
    /// Root-mean-square residual of the log-log fit.
    pub residual: T,
    pub separations: usize,
}

/// Local Hölder exponent of `u` near `x0`.
///
/// For each separation `h = mΔ` up to a quarter of the radius the largest
/// `|u(x)-u(y)|` over pairs in the window is recorded, and the exponent is the
/// least-squares slope of its logarithm against `log h`. Regressing the worst
/// case rather than every pair keeps the smooth interior of the window from
/// pulling the slope towards one. Separations below `4Δ` are skipped: there
/// the half-offset sampling of a singular point dominates the differences.
pub fn holder_exponent_estimate<T: Real>(u: &SampledFunction<T>, x0: T, radius: T) -> Result<HolderEstimate<T>> {
    let g = u.grid;
    let l = g.half_width();
    if !(radius > T::zero()) || x0 - radius < -l || x0 + radius > l {
        return Err(Error::Potential(format!(
            "holder window [{}, {}] must lie inside [-{l}, {l}]",
            x0 - radius,
            x0 + radius
        )));
    }
    let idx: Vec<usize> = (0..g.len()).filter(|&k| Float::abs(g.x(k) - x0) <= radius).collect();
    let max_sep = ((radius / T::lit(4.0)) / g.step())
        .floor()
        .to_usize()
        .unwrap_or(0)
        .min(idx.len().saturating_sub(1));
    let floor = T::lit(1e-13);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for m in MIN_SEPARATION..=max_sep {
        let worst = idx
            .windows(m + 1)
            .map(|w| (u.values[w[m]] - u.values[w[0]]).norm())
            .fold(T::zero(), |a, b| a.max(b));
        if worst > floor {
            xs.push((g.step() * T::from_usize_lossy(m)).ln());
            ys.push(worst.ln());
        }
    }
    if xs.len() < 16 {
        return Err(Error::HolderPairs { found: xs.len() });
    }
    let n = T::from_usize_lossy(xs.len());
    let mx = xs.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = ys.iter().fold(T::zero(), |a, &b| a + b) / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&x, &y) in xs.iter().zip(&ys) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let mut rss = T::zero();
    for (&x, &y) in xs.iter().zip(&ys) {
        let r = y - my - slope * (x - mx);
        rss = rss + r * r;
    }
    Ok(HolderEstimate {
        exponent: slope,
        residual: (rss / n).sqrt(),
        separations: xs.len(),
    })
}
