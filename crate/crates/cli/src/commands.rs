//! The six subcommands. Each writes its artifacts plus the effective config
//! into the output directory and returns whether the run is a success.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use friedrichs::cauchy::{boundary_values, epsilon_limit_oracle, BoundaryValues};
use friedrichs::grid::{SampledFunction, UniformGrid};
use friedrichs::io::{write_csv_file, write_json};
use friedrichs::levinson::{verify_levinson_with, LevinsonConfig};
use friedrichs::linalg::DenseLinalg;
use friedrichs::potential::{sample_potential, PotentialSpec, SampledPotential};
use friedrichs::scattering::{psi_weight, scattering_matrix_with, winding_from_denominator, ScatteringData};
use friedrichs::spectrum::{coupling_sweep, eigenvalue_search_with, eigenvector_residual, EigenvalueReport};
use friedrichs::waveop::{
    boundary_symbol, build_stationary_wave_operator_with, direct_remainder, formula_residual, residual_mellin_config,
    time_dependent_oracle, GridPropagator, WaveOpConfig,
};
use friedrichs::{Error, C};
use serde::Serialize;

use crate::config::{GridConfig, Packet, RunConfig};

/// What went wrong, already sorted into an exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad input: exit 2.
    Config(String),
    /// The numerics refused the input: exit 1.
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Grid(_) | Error::Potential(_) | Error::Table { .. } | Error::Io(_) => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

/// `Ok(true)`: success. `Ok(false)`: outputs written but the check failed.
pub type Outcome = Result<bool, Failure>;

pub struct Context {
    pub config: RunConfig,
    pub out: PathBuf,
}

impl Context {
    pub fn new(config: RunConfig, command: &str) -> Result<Self, Failure> {
        let out = config.output_dir.clone();
        std::fs::create_dir_all(&out)
            .map_err(|e| Failure::Config(format!("cannot create output_dir {}: {e}", out.display())))?;
        write_json(&out.join(format!("{command}.config.json")), &config)?;
        Ok(Self { config, out })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn grid(&self, g: GridConfig) -> Result<UniformGrid<f64>, Failure> {
        Ok(UniformGrid::new(g.l, g.n)?)
    }
}

struct Pipeline {
    potential: SampledPotential<f64>,
    bv: BoundaryValues<f64>,
    s: ScatteringData<f64>,
}

fn pipeline(ctx: &Context, spec: &PotentialSpec<f64>, grid: UniformGrid<f64>) -> Result<Pipeline, Failure> {
    let potential = sample_potential(spec, grid)?;
    let bv = boundary_values(&potential)?;
    let s = scattering_matrix_with(&potential, &bv, ctx.config.tolerances.winding)?;
    Ok(Pipeline { potential, bv, s })
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct OracleCheck {
    x: f64,
    i_plus: C<f64>,
    extrapolated: C<f64>,
    deviation: f64,
    differences: Vec<f64>,
}

#[derive(Serialize)]
struct ScatteringSummary {
    potential: PotentialSpec<f64>,
    grid: GridConfig,
    winding: Option<i64>,
    winding_failure: Option<String>,
    /// `-Δ arg(1 - I₊)/π`, a second estimate of the winding.
    winding_from_denominator: f64,
    exceptional_points: Vec<f64>,
    endpoint_deviations: (f64, f64),
    max_unimodular_deviation: f64,
    /// `max |S - (1 - I₋)/(1 - I₊)|`
    max_ratio_deviation: f64,
    /// `max |Im I₊ + π|u|²|`
    plemelj_deviation: f64,
    epsilon_oracle: Vec<OracleCheck>,
    potential_warnings: Vec<String>,
}

pub fn scattering(ctx: &Context) -> Outcome {
    let c = &ctx.config;
    let grid = ctx.grid(c.grid)?;
    let Pipeline { potential, bv, s } = pipeline(ctx, &c.potential, grid)?;
    s.write_csv(create(&ctx.path("scattering.csv"))?)?;

    let one = C::new(1.0, 0.0);
    let max_unimodular_deviation = s.s.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    let max_ratio_deviation = (0..grid.len())
        .filter(|k| !s.interpolated.contains(k))
        .map(|k| (s.s[k] - (one - bv.i_minus[k]) / (one - bv.i_plus[k])).norm())
        .fold(0.0, f64::max);
    let plemelj_deviation = (0..grid.len())
        .map(|k| (bv.i_plus[k].im + std::f64::consts::PI * potential.modulus_squared.values[k].re).abs())
        .fold(0.0, f64::max);
    let epsilon_oracle = c
        .scattering
        .oracle_points
        .iter()
        .map(|&x| {
            let k = grid.nearest(x);
            let o = epsilon_limit_oracle(&potential.u, grid.x(k), &c.scattering.epsilon_schedule)?;
            Ok(OracleCheck {
                x: grid.x(k),
                i_plus: bv.i_plus[k],
                extrapolated: o.value,
                deviation: (o.value - bv.i_plus[k]).norm(),
                differences: o.differences,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let summary = ScatteringSummary {
        potential: c.potential.clone(),
        grid: c.grid,
        winding: s.winding,
        winding_failure: s.winding_failure.clone(),
        winding_from_denominator: winding_from_denominator(&bv),
        exceptional_points: s.exceptional_points.clone(),
        endpoint_deviations: s.endpoint_deviations(),
        max_unimodular_deviation,
        max_ratio_deviation,
        plemelj_deviation,
        epsilon_oracle,
        potential_warnings: potential.warnings.clone(),
    };
    write_json(&ctx.path("scattering.json"), &summary)?;
    s.winding_result()?;
    Ok(true)
}

#[derive(Serialize)]
struct EigenvalueOutput {
    #[serde(flatten)]
    report: EigenvalueReport<f64>,
    /// `‖(H_u - λ)f_λ‖/‖f_λ‖` on the grid, one per eigenvalue.
    eigenvector_residuals: Vec<f64>,
}

pub fn eigenvalues(ctx: &Context) -> Outcome {
    let c = &ctx.config;
    let grid = ctx.grid(c.grid)?;
    let potential = sample_potential(&c.potential, grid)?;
    let bv = boundary_values(&potential)?;
    let report = eigenvalue_search_with(&potential, &bv, c.tolerances.spectrum)?;
    let eigenvector_residuals = report
        .eigenvalues
        .iter()
        .map(|e| eigenvector_residual(&potential, e.lambda))
        .collect::<Result<Vec<_>, Error>>()?;
    write_json(
        &ctx.path("eigenvalues.json"),
        &EigenvalueOutput {
            report,
            eigenvector_residuals,
        },
    )?;
    Ok(true)
}

pub fn levinson(ctx: &Context) -> Outcome {
    let c = &ctx.config;
    let config = LevinsonConfig {
        winding: c.tolerances.winding,
        spectrum: c.tolerances.spectrum,
        boundary: c.tolerances.boundary_config(),
    };
    let verdict = verify_levinson_with(&c.potential, ctx.grid(c.grid)?, config)?;
    write_json(&ctx.path("levinson.json"), &verdict)?;
    Ok(verdict.pass)
}

#[derive(Serialize)]
struct ResidualSummary {
    /// Largest singular values of the even/odd residual.
    singular_values: Vec<f64>,
    hs_norm: f64,
    tail_ratio: f64,
    /// `σ₁` of `-2πi[u, P]ψ` built from the continuum kernel.
    direct_kernel_sigma1: f64,
    direct_kernel_hs_norm: f64,
}

#[derive(Serialize)]
struct WaveOpSummary {
    potential: PotentialSpec<f64>,
    grid: GridConfig,
    packet: Packet,
    eta_schedule: Vec<f64>,
    /// `‖Ω₋f - A(η_min)f‖/‖f‖`
    relative_error: f64,
    tolerance: f64,
    cauchy_differences: Vec<f64>,
    /// `‖Ω₋f‖/‖f‖`
    isometry: f64,
    /// Largest entry of `Ω₋ - 1 - P(S-1) - K`.
    decomposition_residual: f64,
    remainder_hs_norm: f64,
    formula_residual: Option<ResidualSummary>,
    pass: bool,
}

fn wavepacket(grid: UniformGrid<f64>, p: Packet) -> SampledFunction<f64> {
    SampledFunction::from_fn(grid, |x| {
        let t = (x - p.center) / p.width;
        C::from_polar((-0.5 * t * t).exp(), p.momentum * x)
    })
}

pub fn waveop_verify(ctx: &Context) -> Outcome {
    let c = &ctx.config;
    let grid = ctx.grid(c.waveop.grid)?;
    let Pipeline { potential, bv, s } = pipeline(ctx, &c.potential, grid)?;
    let config = WaveOpConfig {
        projection_padding: c.tolerances.projection_padding,
    };
    let stationary = build_stationary_wave_operator_with(&potential, &bv, &s, config)?;
    let f = wavepacket(grid, c.waveop.packet);
    let norm = f.norm();
    let stationary_f = stationary.omega_minus.apply(&f)?;
    let propagator = GridPropagator::new(&potential.u)?;
    let oracle = time_dependent_oracle(&propagator, &f, &c.waveop.eta_schedule)?;
    let relative_error = stationary_f.distance(&oracle.value)? / norm;

    let formula = if c.waveop.formula_residual {
        let r = formula_residual(&stationary.omega_minus, &s, residual_mellin_config())?;
        let psi = psi_weight(&potential, &bv)?;
        let (k, hs) = direct_remainder(&potential, &psi)?;
        let direct = f64::singular_values(&k.matrix);
        Some(ResidualSummary {
            singular_values: r.singular_values,
            hs_norm: r.hs_norm,
            tail_ratio: r.tail_ratio,
            direct_kernel_sigma1: direct.first().copied().unwrap_or(0.0),
            direct_kernel_hs_norm: hs,
        })
    } else {
        None
    };
    if c.waveop.dump_matrix {
        stationary
            .omega_minus
            .write_binary(create(&ctx.path("omega_minus.bin"))?)?;
    }
    let pass = relative_error <= c.tolerances.wave_operator;
    write_json(
        &ctx.path("waveop.json"),
        &WaveOpSummary {
            potential: c.potential.clone(),
            grid: c.waveop.grid,
            packet: c.waveop.packet,
            eta_schedule: c.waveop.eta_schedule.clone(),
            relative_error,
            tolerance: c.tolerances.wave_operator,
            cauchy_differences: oracle.cauchy_differences,
            isometry: stationary_f.norm() / norm,
            decomposition_residual: stationary.decomposition_residual,
            remainder_hs_norm: stationary.remainder.matrix.frobenius(),
            formula_residual: formula,
            pass,
        },
    )?;
    Ok(pass)
}

#[derive(Serialize)]
struct BoundarySummary {
    square_winding: Option<i64>,
    line_winding: Option<i64>,
    winding_failure: Option<String>,
    orientation: String,
    corner_mismatch: f64,
    det_gamma3_deviation: f64,
    det_gamma1_deviation: f64,
    unitarity_deviation: f64,
    phi_limit_deviation: f64,
    s_even_at_origin: C<f64>,
}

pub fn boundary(ctx: &Context) -> Outcome {
    let c = &ctx.config;
    let Pipeline { s, .. } = pipeline(ctx, &c.potential, ctx.grid(c.grid)?)?;
    let report = boundary_symbol(&s, c.tolerances.boundary_config())?;
    for edge in &report.edges {
        let rows = edge.parameter.iter().zip(&edge.det).map(|(&p, d)| vec![p, d.re, d.im]);
        write_csv_file(
            &ctx.path(&format!("{}.csv", edge.name)),
            &["parameter", "re_det", "im_det"],
            rows,
        )?;
    }
    let line = s.winding_result();
    write_json(
        &ctx.path("boundary_symbol.json"),
        &BoundarySummary {
            square_winding: report.square_winding,
            line_winding: line.as_ref().ok().copied(),
            winding_failure: report.winding_failure.clone(),
            orientation: report.orientation.clone(),
            corner_mismatch: report.corner_mismatch,
            det_gamma3_deviation: report.det_gamma3_deviation,
            det_gamma1_deviation: report.det_gamma1_deviation,
            unitarity_deviation: report.unitarity_deviation,
            phi_limit_deviation: report.phi_limit_deviation,
            s_even_at_origin: s.s_even_at_origin(),
        },
    )?;
    let line = line?;
    match report.square_winding {
        Some(w) => Ok(w == line),
        None => Err(Failure::Numerical(format!(
            "waveop.boundary_symbol: square winding rejected: {}",
            report.winding_failure.unwrap_or_default()
        ))),
    }
}

pub fn sweep(ctx: &Context) -> Outcome {
    let c = &ctx.config;
    let table = coupling_sweep(&c.potential, ctx.grid(c.grid)?, &c.sweep.couplings)?;
    table.write_csv(create(&ctx.path("sweep.csv"))?)?;
    write_json(&ctx.path("sweep.json"), &table)?;
    Ok(true)
}
