//! Dense discretizations of the wave operators and of the pieces of the
//! index formula.
//!
//! * `Ω₋ = 1 - 2πi·u(X)·P·ψ(X)` with `P = χ₍₋∞,0₎(D)` materialized column by
//!   column from the FFT projector, and its split `Ω₋ - 1 = P(S-1) + K`;
//! * an Abel-averaged time-dependent approximant from the eigendecomposition
//!   of `H_u^grid = diag(x) + Δ·uu*`;
//! * the commutator kernel, the residual of the even/odd formula for `Ω₋`, and
//!   the boundary symbol `Γ` on the edges of the compactified quarter plane.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_traits::Float;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cauchy::BoundaryValues;
use crate::error::{Error, Result};
use crate::grid::{
    phi, DilationMultiplier, DilationOperator, HalfLinePair, Mat2, MellinConfig, NegativeFrequencyProjector,
    ProjectionConfig, SampledFunction, UniformGrid,
};
use crate::linalg::{CMatrix, HermitianEigen};
use crate::potential::SampledPotential;
use crate::scalar::{cplx, creal, Real, C};
use crate::scattering::{psi_weight, winding_number_with, PsiWeight, ScatteringData, WindingConfig};
use crate::spectrum::ZERO_TOLERANCE;

/// Padding of the projector inside `Ω₋`: the compression of the full-line
/// `χ₍₋∞,0₎(D)` to the box rather than its periodic version.
pub const PROJECTION_PADDING: usize = 4;
/// Largest admissible `|Ω₋ - 1 - P(S-1) - K|` entry.
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-12;
/// Largest admissible mismatch of `Γ` between edges meeting at a corner.
pub const CORNER_TOLERANCE: f64 = 1e-6;
/// Number of singular values kept in the residual diagnostics.
pub const SINGULAR_VALUES_KEPT: usize = 16;

const MAGIC: &[u8; 8] = b"FRDOPMAT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Functions on `[-L, L]`, one row per grid point.
    Position,
    /// Pairs on `(0, L]`: the even channel first, then the odd channel.
    EvenOdd,
}

impl Representation {
    fn tag(self) -> u32 {
        match self {
            Self::Position => 0,
            Self::EvenOdd => 1,
        }
    }

    fn from_tag(tag: u32) -> Result<Self> {
        match tag {
            0 => Ok(Self::Position),
            1 => Ok(Self::EvenOdd),
            _ => Err(Error::Io(format!("unknown representation tag {tag}"))),
        }
    }
}

/// A dense operator on the sampled Hilbert space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct OperatorMatrix<T: Real> {
    pub grid: UniformGrid<T>,
    pub representation: Representation,
    pub matrix: CMatrix<T>,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn new(grid: UniformGrid<T>, representation: Representation, matrix: CMatrix<T>) -> Result<Self> {
        // N points, or 2·(N/2) channel samples: the same count either way.
        let n = grid.len();
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::Dimension {
                expected: n,
                found: matrix.rows().max(matrix.cols()),
            });
        }
        if !matrix.is_finite() {
            return Err(Error::WaveOp("operator matrix has non-finite entries".into()));
        }
        Ok(Self {
            grid,
            representation,
            matrix,
        })
    }

    pub fn identity(grid: UniformGrid<T>, representation: Representation) -> Self {
        Self {
            grid,
            representation,
            matrix: CMatrix::identity(grid.len()),
        }
    }

    pub fn apply(&self, f: &SampledFunction<T>) -> Result<SampledFunction<T>> {
        if self.representation != Representation::Position {
            return Err(Error::WaveOp(
                "position-space vector applied to an even/odd operator".into(),
            ));
        }
        if f.grid != self.grid {
            return Err(Error::Dimension {
                expected: self.grid.len(),
                found: f.grid.len(),
            });
        }
        SampledFunction::new(self.grid, self.matrix.matvec(&f.values)?)
    }

    /// Writes the 32-byte header (magic, `N`, `L`, representation tag,
    /// reserved) and the entries row by row as little-endian `f64` pairs.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&(self.grid.len() as u64).to_le_bytes())?;
        out.write_all(&self.grid.half_width().to_f64_lossy().to_le_bytes())?;
        out.write_all(&self.representation.tag().to_le_bytes())?;
        out.write_all(&0u32.to_le_bytes())?;
        for z in self.matrix.as_slice() {
            out.write_all(&z.re.to_f64_lossy().to_le_bytes())?;
            out.write_all(&z.im.to_f64_lossy().to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut header = [0u8; 32];
        input.read_exact(&mut header)?;
        if &header[..8] != MAGIC {
            return Err(Error::Io("not an operator matrix dump (bad magic)".into()));
        }
        let word = |a: usize| -> [u8; 8] { header[a..a + 8].try_into().expect("8 bytes") };
        let n = usize::try_from(u64::from_le_bytes(word(8))).map_err(|e| Error::Io(e.to_string()))?;
        let l = f64::from_le_bytes(word(16));
        let tag = u32::from_le_bytes(header[24..28].try_into().expect("4 bytes"));
        let grid = UniformGrid::new(T::lit(l), n)?;
        let mut data = Vec::with_capacity(n * n);
        let mut pair = [0u8; 16];
        for _ in 0..n * n {
            input.read_exact(&mut pair)?;
            let re = f64::from_le_bytes(pair[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(pair[8..].try_into().expect("8 bytes"));
            data.push(cplx(T::lit(re), T::lit(im)));
        }
        Self::new(
            grid,
            Representation::from_tag(tag)?,
            CMatrix::from_row_major(n, n, data)?,
        )
    }
}

/// `H_u^grid = diag(x) + Δ·u u*`. The `Δ` is the quadrature weight of the
/// inner product in `⟨u,·⟩u`.
pub fn grid_hamiltonian<T: Real>(u: &SampledFunction<T>) -> CMatrix<T> {
    let g = u.grid;
    let n = g.len();
    let d = g.step();
    let mut h = CMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            h[(j, k)] = u.values[j] * u.values[k].conj() * d;
        }
        h[(j, j)] = h[(j, j)] + creal(g.x(j));
    }
    h
}

/// Matrix of the negative-frequency projection on the grid.
pub fn projection_matrix<T: Real>(grid: UniformGrid<T>, padding: usize) -> Result<CMatrix<T>> {
    let projector = NegativeFrequencyProjector::new(grid, ProjectionConfig { padding })?;
    let n = grid.len();
    let columns: Vec<Vec<C<T>>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![creal(T::zero()); n];
            e[j] = creal(T::one());
            projector.apply(&e)
        })
        .collect();
    CMatrix::from_columns(n, &columns)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveOpConfig {
    pub projection_padding: usize,
}

impl Default for WaveOpConfig {
    fn default() -> Self {
        Self {
            projection_padding: PROJECTION_PADDING,
        }
    }
}

/// `Ω₋` with the two pieces of `Ω₋ - 1`.
#[derive(Debug, Clone)]
pub struct StationaryWaveOperator<T: Real> {
    pub omega_minus: OperatorMatrix<T>,
    /// `P·diag(S - 1)`
    pub projection_part: OperatorMatrix<T>,
    /// `K = -2πi·[diag(u), P]·diag(ψ)`
    pub remainder: OperatorMatrix<T>,
    /// Largest entry of `Ω₋ - 1 - P(S-1) - K`.
    pub decomposition_residual: T,
}

pub fn build_stationary_wave_operator<T: Real>(
    potential: &SampledPotential<T>,
    bv: &BoundaryValues<T>,
    s: &ScatteringData<T>,
) -> Result<StationaryWaveOperator<T>> {
    build_stationary_wave_operator_with(potential, bv, s, WaveOpConfig::default())
}

pub fn build_stationary_wave_operator_with<T: Real>(
    potential: &SampledPotential<T>,
    bv: &BoundaryValues<T>,
    s: &ScatteringData<T>,
    config: WaveOpConfig,
) -> Result<StationaryWaveOperator<T>> {
    let grid = potential.grid();
    if bv.grid != grid || s.grid != grid {
        return Err(Error::Dimension {
            expected: grid.len(),
            found: if bv.grid != grid { bv.grid.len() } else { s.grid.len() },
        });
    }
    let psi = psi_weight(potential, bv)?;
    let u = &potential.u.values;
    let tol = T::lit(ZERO_TOLERANCE) * potential.u.max_abs();
    if let Some(k) = (0..grid.len()).find(|&k| psi.mask[k] && u[k].norm() > tol) {
        return Err(Error::WaveOp(format!(
            "exceptional point x = {} lies inside the support of u, where ψ is undefined",
            grid.x(k)
        )));
    }
    let p = projection_matrix(grid, config.projection_padding)?;
    let two_pi_i = cplx(T::zero(), T::two() * T::PI());

    let up = p.scale_rows(u);
    let omega = CMatrix::identity(grid.len()).sub(&up.scale_columns(&psi.values).scale(two_pi_i))?;
    let s_minus_one: Vec<C<T>> = s.s.iter().map(|z| z - creal(T::one())).collect();
    let projection_part = p.scale_columns(&s_minus_one);
    let commutator = up.sub(&p.scale_columns(u))?;
    let remainder = commutator.scale_columns(&psi.values).scale(-two_pi_i);

    let reassembled = CMatrix::identity(grid.len()).add(&projection_part)?.add(&remainder)?;
    let decomposition_residual = omega.sub(&reassembled)?.max_abs();
    if !(decomposition_residual <= T::lit(DECOMPOSITION_TOLERANCE)) {
        return Err(Error::WaveOp(format!(
            "Ω₋ - 1 - P(S-1) - K has an entry of size {decomposition_residual:e} > {DECOMPOSITION_TOLERANCE:e}"
        )));
    }
    let wrap = |m| OperatorMatrix::new(grid, Representation::Position, m);
    Ok(StationaryWaveOperator {
        omega_minus: wrap(omega)?,
        projection_part: wrap(projection_part)?,
        remainder: wrap(remainder)?,
        decomposition_residual,
    })
}

/// `Ω₊ = Ω₋·diag(conj S)`.
pub fn build_wave_operator_plus<T: Real>(
    omega_minus: &OperatorMatrix<T>,
    s: &ScatteringData<T>,
) -> Result<OperatorMatrix<T>> {
    if omega_minus.grid != s.grid || omega_minus.representation != Representation::Position {
        return Err(Error::WaveOp("Ω₋ and S must share a position-space grid".into()));
    }
    let conj: Vec<C<T>> = s.s.iter().map(|z| z.conj()).collect();
    OperatorMatrix::new(
        s.grid,
        Representation::Position,
        omega_minus.matrix.scale_columns(&conj),
    )
}

/// Eigendecomposition of `H_u^grid`, reused across Abel parameters.
#[derive(Debug, Clone)]
pub struct GridPropagator<T: Real> {
    grid: UniformGrid<T>,
    eigen: HermitianEigen<T>,
}

impl<T: Real> GridPropagator<T> {
    pub fn new(u: &SampledFunction<T>) -> Result<Self> {
        Ok(Self {
            grid: u.grid,
            eigen: T::hermitian_eigen(&grid_hamiltonian(u))?,
        })
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigen.values
    }

    /// `e^{-iH_u t} f`.
    pub fn evolve(&self, f: &SampledFunction<T>, t: T) -> Result<SampledFunction<T>> {
        if f.grid != self.grid {
            return Err(Error::Dimension {
                expected: self.grid.len(),
                found: f.grid.len(),
            });
        }
        let v = &self.eigen.vectors;
        let mut coeffs = v.adjoint().matvec(&f.values)?;
        for (c, &l) in coeffs.iter_mut().zip(&self.eigen.values) {
            *c = *c * C::from_polar(T::one(), -l * t);
        }
        SampledFunction::new(self.grid, v.matvec(&coeffs)?)
    }

    /// `η∫₀^∞ e^{-ηs} e^{-iH_u s} e^{iH₀ s} f ds`, integrated in closed form
    /// in the two eigenbases:
    /// `Σ_m v_m Σ_k conj(v_m)_k f_k · η/(η + i(λ_m - x_k))`.
    pub fn abel_mean(&self, f: &SampledFunction<T>, eta: T) -> Result<SampledFunction<T>> {
        if f.grid != self.grid {
            return Err(Error::Dimension {
                expected: self.grid.len(),
                found: f.grid.len(),
            });
        }
        let n = self.grid.len();
        let v = &self.eigen.vectors;
        let xs = self.grid.points();
        let coeffs: Vec<C<T>> = (0..n)
            .into_par_iter()
            .map(|m| {
                let lm = self.eigen.values[m];
                (0..n).fold(creal(T::zero()), |acc, k| {
                    let w = creal(eta) / cplx(eta, lm - xs[k]);
                    acc + v[(k, m)].conj() * f.values[k] * w
                })
            })
            .collect();
        SampledFunction::new(self.grid, v.matvec(&coeffs)?)
    }
}

/// Output of [`time_dependent_oracle`].
#[derive(Debug, Clone)]
pub struct TimeDependentResult<T: Real> {
    /// Approximant at the smallest `η`.
    pub value: SampledFunction<T>,
    pub approximants: Vec<SampledFunction<T>>,
    /// `‖A(η_{i+1}) - A(η_i)‖/‖f‖`, which must decrease.
    pub cauchy_differences: Vec<T>,
}

/// Abel-averaged approximant of `Ω₋f` over a decreasing `η` schedule.
pub fn time_dependent_oracle<T: Real>(
    propagator: &GridPropagator<T>,
    f: &SampledFunction<T>,
    etas: &[T],
) -> Result<TimeDependentResult<T>> {
    if etas.len() < 2 || etas.windows(2).any(|w| !(w[1] < w[0])) || etas.iter().any(|&e| !(e > T::zero())) {
        return Err(Error::WaveOp(
            "Abel schedule must hold at least two strictly decreasing positive η".into(),
        ));
    }
    let norm = f.norm();
    if norm == T::zero() {
        return Err(Error::WaveOp("time-dependent oracle needs a nonzero input".into()));
    }
    let approximants = etas
        .iter()
        .map(|&eta| propagator.abel_mean(f, eta))
        .collect::<Result<Vec<_>>>()?;
    let cauchy_differences = approximants
        .windows(2)
        .map(|w| w[1].distance(&w[0]).map(|d| d / norm))
        .collect::<Result<Vec<_>>>()?;
    if cauchy_differences.windows(2).any(|w| !(w[1] < w[0])) {
        let shown: Vec<f64> = cauchy_differences.iter().map(|d| d.to_f64_lossy()).collect();
        return Err(Error::WaveOp(format!(
            "Abel approximants do not settle: Cauchy differences {shown:?} are not decreasing; enlarge L"
        )));
    }
    Ok(TimeDependentResult {
        value: approximants.last().expect("two approximants").clone(),
        approximants,
        cauchy_differences,
    })
}

/// `k(x,y) = (i/2π)(u(x) - u(y))/(y - x)·ψ(y)` as a matrix with the
/// quadrature weight, and its Hilbert-Schmidt norm.
pub fn commutator_kernel<T: Real>(
    potential: &SampledPotential<T>,
    psi: &PsiWeight<T>,
) -> Result<(OperatorMatrix<T>, T)> {
    let grid = potential.grid();
    if psi.grid != grid {
        return Err(Error::Dimension {
            expected: grid.len(),
            found: psi.grid.len(),
        });
    }
    let n = grid.len();
    let d = grid.step();
    let u = &potential.u.values;
    let c = cplx(T::zero(), (T::two() * T::PI()).recip());
    let mut k = CMatrix::zeros(n, n);
    for j in 0..n {
        let xj = grid.x(j);
        for m in 0..n {
            let entry = if m == j {
                let du = if j == 0 {
                    (u[1] - u[0]) / d
                } else if j == n - 1 {
                    (u[n - 1] - u[n - 2]) / d
                } else {
                    (u[j + 1] - u[j - 1]) / (T::two() * d)
                };
                -du
            } else {
                (u[j] - u[m]) / (grid.x(m) - xj)
            };
            k[(j, m)] = c * entry * psi.values[m] * d;
        }
    }
    let hs = k.frobenius();
    Ok((OperatorMatrix::new(grid, Representation::Position, k)?, hs))
}

/// `K = -2πi·[u, P]ψ` assembled from [`commutator_kernel`] rather than from
/// the discrete projector, with its Hilbert-Schmidt norm.
pub fn direct_remainder<T: Real>(
    potential: &SampledPotential<T>,
    psi: &PsiWeight<T>,
) -> Result<(OperatorMatrix<T>, T)> {
    let (k, hs) = commutator_kernel(potential, psi)?;
    let factor = cplx(T::zero(), -T::two() * T::PI());
    let scaled = OperatorMatrix::new(k.grid, k.representation, k.matrix.scale(factor))?;
    Ok((scaled, hs * T::two() * T::PI()))
}

/// `𝒰 A 𝒰*` for a position-space operator.
pub fn to_even_odd<T: Real>(a: &OperatorMatrix<T>) -> Result<OperatorMatrix<T>> {
    if a.representation != Representation::Position {
        return Err(Error::WaveOp(
            "operator is already in the even/odd representation".into(),
        ));
    }
    let n = a.grid.len();
    let h = n / 2;
    // Row r of 𝒰 has ±1/√2 at positions h+j and h-1-j.
    let legs = |r: usize| -> [(usize, T); 2] {
        let s = T::half().sqrt();
        if r < h {
            [(h + r, s), (h - 1 - r, s)]
        } else {
            let j = r - h;
            [(h + j, s), (h - 1 - j, -s)]
        }
    };
    let mut out = CMatrix::zeros(n, n);
    for r in 0..n {
        let lr = legs(r);
        for c in 0..n {
            let lc = legs(c);
            let mut acc = creal(T::zero());
            for &(i, si) in &lr {
                for &(j, sj) in &lc {
                    acc = acc + a.matrix[(i, j)] * (si * sj);
                }
            }
            out[(r, c)] = acc;
        }
    }
    OperatorMatrix::new(a.grid, Representation::EvenOdd, out)
}

/// Residual of the even/odd formula with its diagnostics.
#[derive(Debug, Clone)]
pub struct FormulaResidual<T: Real> {
    pub residual: OperatorMatrix<T>,
    /// Largest singular values, decreasing.
    pub singular_values: Vec<T>,
    pub hs_norm: T,
    /// `σ_16/σ_1`, or the last kept over the first for smaller matrices.
    pub tail_ratio: T,
}

/// Mellin settings for whole columns of the identity: the innermost sample
/// carries a large share of the norm, so the log window reaches deeper.
pub fn residual_mellin_config<T: Real>() -> MellinConfig<T> {
    MellinConfig {
        floor_fraction: T::lit(1e-8),
        ..MellinConfig::default()
    }
}

/// `𝒰Ω₋𝒰* - 1 - Φ(A₊)·[[s_e-1, s_o], [s_o, s_e-1]](X₊)`.
pub fn formula_residual<T: Real>(
    omega_minus: &OperatorMatrix<T>,
    s: &ScatteringData<T>,
    config: MellinConfig<T>,
) -> Result<FormulaResidual<T>> {
    if omega_minus.grid != s.grid {
        return Err(Error::Dimension {
            expected: s.grid.len(),
            found: omega_minus.grid.len(),
        });
    }
    let grid = s.grid;
    let n = grid.len();
    let h = n / 2;
    let conjugated = to_even_odd(omega_minus)?;
    let op = DilationOperator::new(grid, &DilationMultiplier::negative_frequency_symbol(), config)?;
    let one = creal(T::one());
    let columns: Vec<Vec<C<T>>> = (0..n)
        .into_par_iter()
        .map(|c| {
            let (j, odd) = if c < h { (c, false) } else { (c - h, true) };
            let mut p = HalfLinePair::zeros(grid);
            let (se, so) = (s.s_even[j] - one, s.s_odd[j]);
            if odd {
                p.first[j] = so;
                p.second[j] = se;
            } else {
                p.first[j] = se;
                p.second[j] = so;
            }
            op.apply(&p).map(|q| q.stacked())
        })
        .collect::<Result<Vec<_>>>()?;
    let main = CMatrix::identity(n).add(&CMatrix::from_columns(n, &columns)?)?;
    let residual = conjugated.matrix.sub(&main)?;
    let mut singular_values = T::singular_values(&residual);
    singular_values.truncate(SINGULAR_VALUES_KEPT);
    let hs_norm = residual.frobenius();
    let first = singular_values.first().copied().unwrap_or(T::zero());
    let last = singular_values.last().copied().unwrap_or(T::zero());
    let tail_ratio = if first > T::zero() { last / first } else { T::zero() };
    Ok(FormulaResidual {
        residual: OperatorMatrix::new(grid, Representation::EvenOdd, residual)?,
        singular_values,
        hs_norm,
        tail_ratio,
    })
}

/// Where the dilation edges are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConfig {
    /// `y` runs over `[-cutoff, cutoff]` plus the limits `±∞`.
    pub cutoff: f64,
    pub y_points: usize,
    pub winding: WindingConfig,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self {
            cutoff: 40.0,
            y_points: 801,
            winding: WindingConfig::default(),
        }
    }
}

/// One edge of the square, in traversal order. Infinite parameters are
/// stored as `±inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EdgeCurve<T: Real> {
    pub name: String,
    pub parameter: Vec<T>,
    pub gamma: Vec<Mat2<T>>,
    pub det: Vec<C<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BoundarySymbolReport<T: Real> {
    /// `γ₁ = Γ(0,·)`, `γ₂ = Γ(·,+∞)`, `γ₃ = Γ(+∞,·)`, `γ₄ = Γ(·,-∞)`.
    pub edges: [EdgeCurve<T>; 4],
    pub square_winding: Option<i64>,
    pub winding_failure: Option<String>,
    /// How the loop is traversed.
    pub orientation: String,
    pub corner_mismatch: T,
    /// `max |det γ₃ - 1|`
    pub det_gamma3_deviation: T,
    /// `max |det γ₁ - s_e(0)|`
    pub det_gamma1_deviation: T,
    /// `max ‖Γ*Γ - 1‖` over all edge samples.
    pub unitarity_deviation: T,
    /// `|φ(±cutoff) ∓ 1|`
    pub phi_limit_deviation: T,
}

fn gamma<T: Real>(se: C<T>, so: C<T>, p: C<T>) -> Mat2<T> {
    let one = creal(T::one());
    let h = T::half();
    let pb = p.conj();
    [
        [(se - pb * so + one) * h, (so - pb * (se - one)) * h],
        [(so - p * (se - one)) * h, (se - p * so + one) * h],
    ]
}

fn det2<T: Real>(m: &Mat2<T>) -> C<T> {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn unitarity_defect<T: Real>(m: &Mat2<T>) -> T {
    let mut worst = T::zero();
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = creal(T::zero());
            for k in 0..2 {
                acc = acc + m[k][i].conj() * m[k][j];
            }
            if i == j {
                acc = acc - creal(T::one());
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

fn mat_distance<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> T {
    let mut worst = T::zero();
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max((a[i][j] - b[i][j]).norm());
        }
    }
    worst
}

fn edge<T: Real>(name: &str, parameter: Vec<T>, gamma: Vec<Mat2<T>>) -> EdgeCurve<T> {
    let det = gamma.iter().map(det2).collect();
    EdgeCurve {
        name: name.into(),
        parameter,
        gamma,
        det,
    }
}

/// `Γ` on the four edges and the winding of `det Γ` around the square.
///
/// The loop runs `γ₄` from `x = 0` to `∞`, `γ₃` from `y = -∞` to `+∞`, `γ₂`
/// from `x = ∞` back to `0` and `γ₁` from `y = +∞` to `-∞`. Along it the
/// determinant traces `S` over the negative half line and then the positive
/// one, each from `-∞` towards `+∞`, so the loop winding is compared with the
/// line winding of `S` directly. Running the `x` edges the other way round is
/// the same loop after `x ↦ 1/x` and reverses the sign.
pub fn boundary_symbol<T: Real>(s: &ScatteringData<T>, config: BoundaryConfig) -> Result<BoundarySymbolReport<T>> {
    if config.y_points < 2 || !(config.cutoff > 0.0) {
        return Err(Error::WaveOp(
            "boundary symbol needs a positive cutoff and at least two y samples".into(),
        ));
    }
    let zero = creal(T::zero());
    let one = creal(T::one());
    let inf = T::infinity();
    let s0 = s.s_even_at_origin();
    let half = s.grid.half_points();

    // x-edge samples: 0, the half grid, ∞.
    let mut xs = vec![T::zero()];
    xs.extend(half.iter().copied());
    xs.push(inf);
    let mut x_vals = vec![(s0, zero)];
    x_vals.extend(s.s_even.iter().zip(&s.s_odd).map(|(&e, &o)| (e, o)));
    x_vals.push((one, zero));

    // y-edge samples: -∞, the uniform grid on [-cutoff, cutoff], +∞.
    let cutoff = T::lit(config.cutoff);
    let m = config.y_points;
    let mut ys = vec![-inf];
    ys.extend((0..m).map(|k| -cutoff + cutoff * T::two() * T::from_usize_lossy(k) / T::from_usize_lossy(m - 1)));
    ys.push(inf);
    let phi_at = |y: T| {
        if y == inf {
            one
        } else if y == -inf {
            -one
        } else {
            phi(y)
        }
    };

    let g1: Vec<Mat2<T>> = ys.iter().map(|&y| gamma(s0, zero, phi_at(y))).collect();
    let g2: Vec<Mat2<T>> = x_vals.iter().map(|&(e, o)| gamma(e, o, one)).collect();
    let g3: Vec<Mat2<T>> = ys.iter().map(|&y| gamma(one, zero, phi_at(y))).collect();
    let g4: Vec<Mat2<T>> = x_vals.iter().map(|&(e, o)| gamma(e, o, -one)).collect();

    let last_y = ys.len() - 1;
    let last_x = xs.len() - 1;
    let corners = [
        (&g4[0], &g1[0]),
        (&g4[last_x], &g3[0]),
        (&g3[last_y], &g2[last_x]),
        (&g2[0], &g1[last_y]),
    ];
    let corner_mismatch = corners
        .iter()
        .map(|(a, b)| mat_distance(a, b))
        .fold(T::zero(), |a, b| a.max(b));
    if !(corner_mismatch <= T::lit(CORNER_TOLERANCE)) {
        return Err(Error::CornerMismatch {
            corner: "∂□".into(),
            mismatch: corner_mismatch.to_f64_lossy(),
        });
    }

    let edges = [
        edge("gamma1", ys.clone(), g1),
        edge("gamma2", xs.clone(), g2),
        edge("gamma3", ys, g3),
        edge("gamma4", xs, g4),
    ];
    let det_gamma3_deviation = edges[2]
        .det
        .iter()
        .map(|d| (d - one).norm())
        .fold(T::zero(), |a, b| a.max(b));
    let det_gamma1_deviation = edges[0]
        .det
        .iter()
        .map(|d| (d - s0).norm())
        .fold(T::zero(), |a, b| a.max(b));
    let unitarity_deviation = edges
        .iter()
        .flat_map(|e| e.gamma.iter())
        .map(unitarity_defect)
        .fold(T::zero(), |a, b| a.max(b));
    let phi_limit_deviation = (phi(cutoff) - one).norm().max((phi(-cutoff) + one).norm());

    // γ₄ forward, γ₃ forward, γ₂ reversed, γ₁ reversed, dropping repeated corners.
    let mut lap: Vec<C<T>> = edges[3].det.clone();
    lap.extend(edges[2].det.iter().skip(1));
    lap.extend(edges[1].det.iter().rev().skip(1));
    lap.extend(edges[0].det.iter().rev().skip(1).take(edges[0].det.len() - 2));
    let (square_winding, winding_failure) = match closed_winding(&lap, config.winding) {
        Ok(w) => (Some(w), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(BoundarySymbolReport {
        edges,
        square_winding,
        winding_failure,
        orientation: "gamma4 x:0->inf, gamma3 y:-inf->+inf, gamma2 x:inf->0, gamma1 y:+inf->-inf".into(),
        corner_mismatch,
        det_gamma3_deviation,
        det_gamma1_deviation,
        unitarity_deviation,
        phi_limit_deviation,
    })
}

/// Winding of a closed polygon on the unit circle; the last point connects
/// back to the first.
fn closed_winding<T: Real>(points: &[C<T>], config: WindingConfig) -> Result<i64> {
    let mut total = 0.0;
    let n = points.len();
    for k in 0..n {
        let z = points[k];
        let deviation = Float::abs(z.norm() - T::one()).to_f64_lossy();
        if !(deviation <= config.unimodular_tolerance) {
            return Err(Error::NotUnimodular { x: k as f64, deviation });
        }
        let step = (points[(k + 1) % n] / z).arg().to_f64_lossy();
        if step.abs() >= config.max_phase_step {
            return Err(Error::PhaseStep {
                x: k as f64,
                step,
                limit: config.max_phase_step,
            });
        }
        total += step;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Line winding of `S`, for comparison with the square.
pub fn line_winding<T: Real>(s: &ScatteringData<T>, config: WindingConfig) -> Result<i64> {
    winding_number_with(&s.s, s.grid, creal(T::one()), config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cauchy::boundary_values;
    use crate::potential::{sample_potential, PotentialSpec};
    use crate::scattering::scattering_matrix;

    struct Setup {
        p: SampledPotential<f64>,
        bv: BoundaryValues<f64>,
        s: ScatteringData<f64>,
    }

    fn setup(spec: PotentialSpec<f64>, l: f64, n: usize) -> Setup {
        let g = UniformGrid::new(l, n).unwrap();
        let p = sample_potential(&spec, g).unwrap();
        let bv = boundary_values(&p).unwrap();
        let s = scattering_matrix(&p, &bv).unwrap();
        Setup { p, bv, s }
    }

    fn packet(g: UniformGrid<f64>, x0: f64, k0: f64) -> SampledFunction<f64> {
        SampledFunction::from_fn(g, |x| C::from_polar((-(x - x0).powi(2) / 2.0).exp(), k0 * x))
    }

    #[test]
    fn zero_potential_gives_identities() {
        let t = setup(PotentialSpec::zero(), 10.0, 128);
        let w = build_stationary_wave_operator(&t.p, &t.bv, &t.s).unwrap();
        let id = CMatrix::identity(128);
        assert_eq!(w.omega_minus.matrix, id);
        let plus = build_wave_operator_plus(&w.omega_minus, &t.s).unwrap();
        assert_eq!(plus.matrix, id);
        let prop = GridPropagator::new(&t.p.u).unwrap();
        let f = packet(t.p.grid(), 1.0, 0.5);
        let r = prop.abel_mean(&f, 0.3).unwrap();
        assert!(r.distance(&f).unwrap() <= 1e-12);
        let psi = psi_weight(&t.p, &t.bv).unwrap();
        let (k, hs) = commutator_kernel(&t.p, &psi).unwrap();
        assert_eq!(hs, 0.0);
        assert_eq!(k.matrix.max_abs(), 0.0);
    }

    #[test]
    fn decomposition_is_exact() {
        let t = setup(PotentialSpec::gaussian(0.3, 0.0, 1.0), 10.0, 256);
        let w = build_stationary_wave_operator(&t.p, &t.bv, &t.s).unwrap();
        assert!(w.decomposition_residual <= 1e-12);
    }

    #[test]
    fn binary_dump_round_trips() {
        let t = setup(PotentialSpec::gaussian(0.3, 0.0, 1.0), 10.0, 64);
        let w = build_stationary_wave_operator(&t.p, &t.bv, &t.s).unwrap();
        let mut buf = Vec::new();
        w.omega_minus.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 64 * 64 * 16);
        assert_eq!(&buf[..8], b"FRDOPMAT");
        let back = OperatorMatrix::<f64>::read_binary(buf.as_slice()).unwrap();
        assert_eq!(back, w.omega_minus);
        buf[0] = b'X';
        assert!(OperatorMatrix::<f64>::read_binary(buf.as_slice()).is_err());
    }

    #[test]
    fn plus_is_minus_times_conjugate_s() {
        let t = setup(PotentialSpec::gaussian(0.3, 0.0, 1.0), 10.0, 256);
        let w = build_stationary_wave_operator(&t.p, &t.bv, &t.s).unwrap();
        let plus = build_wave_operator_plus(&w.omega_minus, &t.s).unwrap();
        let f = packet(t.p.grid(), 2.0, 1.0);
        let sf = f.map(|_, v| v);
        let conj_s_f =
            SampledFunction::new(f.grid, f.values.iter().zip(&t.s.s).map(|(v, s)| v * s.conj()).collect()).unwrap();
        let lhs = plus.apply(&sf).unwrap();
        let rhs = w.omega_minus.apply(&conj_s_f).unwrap();
        assert!(lhs.distance(&rhs).unwrap() <= 1e-13);
        assert!((lhs.norm() - rhs.norm()).abs() <= 1e-13);
    }

    #[test]
    fn kernel_vanishes_where_u_is_constant() {
        // Flat top between -1 and 1.
        let g = UniformGrid::new(10.0, 256).unwrap();
        let u = SampledFunction::from_real_fn(g, |x: f64| {
            if x.abs() <= 1.0 {
                0.5
            } else {
                0.5 * (-(x.abs() - 1.0).powi(2) * 4.0).exp()
            }
        });
        let p = SampledPotential::from_samples(u);
        let bv = boundary_values(&p).unwrap();
        let psi = psi_weight(&p, &bv).unwrap();
        let (k, _) = commutator_kernel(&p, &psi).unwrap();
        for j in 0..256 {
            for m in 0..256 {
                // Centered differences reach one sample outside.
                if g.x(j).abs() < 1.0 - g.step() && g.x(m).abs() < 1.0 - g.step() {
                    assert_eq!(k.matrix[(j, m)], C::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn even_odd_conjugation_is_unitary() {
        let t = setup(PotentialSpec::gaussian(0.3, 0.5, 1.0), 10.0, 64);
        let w = build_stationary_wave_operator(&t.p, &t.bv, &t.s).unwrap();
        let b = to_even_odd(&w.omega_minus).unwrap();
        assert!((b.matrix.frobenius() - w.omega_minus.matrix.frobenius()).abs() <= 1e-12);
        let id = to_even_odd(&OperatorMatrix::identity(t.p.grid(), Representation::Position)).unwrap();
        assert!(id.matrix.sub(&CMatrix::identity(64)).unwrap().max_abs() <= 1e-15);
    }

    #[test]
    fn zero_potential_has_zero_residual() {
        let t = setup(PotentialSpec::zero(), 10.0, 64);
        let w = build_stationary_wave_operator(&t.p, &t.bv, &t.s).unwrap();
        let r = formula_residual(&w.omega_minus, &t.s, residual_mellin_config()).unwrap();
        assert!(r.hs_norm <= 1e-13);
    }

    #[test]
    fn boundary_symbol_determinants() {
        let c = (4.0f64 * 35.0 / 32.0).sqrt();
        let t = setup(PotentialSpec::bump(c, -1.0, 1.0, 2.0), 20.0, 2048);
        let r = boundary_symbol(&t.s, BoundaryConfig::default()).unwrap();
        assert!(r.det_gamma3_deviation <= 1e-8);
        assert!(r.det_gamma1_deviation <= 1e-8);
        assert!(r.unitarity_deviation <= 1e-8, "{}", r.unitarity_deviation);
        assert!(r.phi_limit_deviation <= 1e-12);
        assert!(r.corner_mismatch <= 1e-6);
        // det γ₂(x) = S(-x), det γ₄(x) = S(x).
        let h = t.s.grid.half_len();
        for j in 0..h {
            assert!((r.edges[1].det[j + 1] - t.s.s[h - 1 - j]).norm() <= 1e-12);
            assert!((r.edges[3].det[j + 1] - t.s.s[h + j]).norm() <= 1e-12);
        }
        assert_eq!(t.s.winding, Some(-1));
        assert_eq!(r.square_winding, t.s.winding);
    }
}
