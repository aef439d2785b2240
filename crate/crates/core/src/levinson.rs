//! End-to-end check of `ω(S) = -N`: the winding of the scattering function
//! against the number of eigenvalues, with the winding computed twice (along
//! the line and around the boundary square).

use serde::{Deserialize, Serialize};

use crate::cauchy::boundary_values;
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::potential::{sample_potential, PotentialSpec};
use crate::scalar::Real;
use crate::scattering::{scattering_matrix_with, WindingConfig};
use crate::spectrum::{eigenvalue_search_with, SpectrumConfig};
use crate::waveop::{boundary_symbol, BoundaryConfig};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LevinsonConfig {
    pub winding: WindingConfig,
    pub spectrum: SpectrumConfig,
    pub boundary: BoundaryConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GridParameters<T: Real> {
    #[serde(rename = "L")]
    pub half_width: T,
    #[serde(rename = "N")]
    pub points: usize,
    pub step: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LevinsonDiagnostics<T: Real> {
    /// `|S(-L) - 1|`, `|S(L) - 1|`
    pub endpoint_deviations: (T, T),
    /// Roots of `1 - I₊` off the zero set of `u`.
    pub exceptional_points: Vec<T>,
    pub eigenvalues: Vec<T>,
    pub grid: GridParameters<T>,
    pub corner_mismatch: T,
    pub potential_warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LevinsonVerdict<T: Real> {
    pub potential: PotentialSpec<T>,
    #[serde(rename = "N")]
    pub n: usize,
    pub omega: i64,
    pub square_omega: i64,
    /// `omega == -N` and `square_omega == omega`.
    pub pass: bool,
    /// Why `pass` is false.
    pub reason: Option<String>,
    pub diagnostics: LevinsonDiagnostics<T>,
}

pub fn verify_levinson<T: Real>(spec: &PotentialSpec<T>, grid: UniformGrid<T>) -> Result<LevinsonVerdict<T>> {
    verify_levinson_with(spec, grid, LevinsonConfig::default())
}

/// Runs the whole pipeline. A rejected winding (non-integer, unresolved,
/// not unimodular) is returned as the error, never rounded.
pub fn verify_levinson_with<T: Real>(
    spec: &PotentialSpec<T>,
    grid: UniformGrid<T>,
    config: LevinsonConfig,
) -> Result<LevinsonVerdict<T>> {
    spec.validate()?;
    let potential = sample_potential(spec, grid)?;
    let bv = boundary_values(&potential)?;
    let s = scattering_matrix_with(&potential, &bv, config.winding)?;
    let omega = s.winding_result()?;
    let report = eigenvalue_search_with(&potential, &bv, config.spectrum)?;
    let square = boundary_symbol(
        &s,
        BoundaryConfig {
            winding: config.winding,
            ..config.boundary
        },
    )?;
    let square_omega = match square.square_winding {
        Some(w) => w,
        None => {
            return Err(Error::WaveOp(format!(
                "boundary_symbol: winding of det Γ around the square rejected: {}",
                square.winding_failure.unwrap_or_default()
            )))
        }
    };

    let n = report.count;
    let reason = if square_omega != omega {
        Some(format!(
            "line winding {omega} and square winding {square_omega} disagree; numerical failure at this resolution"
        ))
    } else if omega != -(n as i64) {
        Some(format!("omega = {omega} but N = {n}: omega != -N at this resolution"))
    } else {
        None
    };
    Ok(LevinsonVerdict {
        potential: spec.clone(),
        n,
        omega,
        square_omega,
        pass: reason.is_none(),
        reason,
        diagnostics: LevinsonDiagnostics {
            endpoint_deviations: s.endpoint_deviations(),
            exceptional_points: report.exceptional,
            eigenvalues: report.eigenvalues.iter().map(|e| e.lambda).collect(),
            grid: GridParameters {
                half_width: grid.half_width(),
                points: grid.len(),
                step: grid.step(),
            },
            corner_mismatch: square.corner_mismatch,
            potential_warnings: potential.warnings,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_potential_passes_trivially() {
        let v = verify_levinson(&PotentialSpec::<f64>::zero(), UniformGrid::new(10.0, 512).unwrap()).unwrap();
        assert_eq!((v.n, v.omega, v.square_omega, v.pass), (0, 0, 0, true));
        assert!(v.reason.is_none());
    }

    #[test]
    fn strong_bump_has_one_bound_state_and_winds_once_clockwise() {
        let c = (4.0 * 35.0 / 32.0f64).sqrt();
        let v = verify_levinson(
            &PotentialSpec::bump(c, -1.0, 1.0, 2.0),
            UniformGrid::new(20.0, 2048).unwrap(),
        )
        .unwrap();
        assert_eq!((v.n, v.omega, v.square_omega), (1, -1, -1));
        assert!(v.pass);
        assert_eq!(v.diagnostics.eigenvalues.len(), 1);
        assert!(v.diagnostics.eigenvalues[0] > 1.0);
    }

    #[test]
    fn single_precision_pipeline_runs() {
        let v = verify_levinson(
            &PotentialSpec::<f32>::gaussian(0.3, 0.0, 1.0),
            UniformGrid::new(20.0, 512).unwrap(),
        )
        .unwrap();
        assert_eq!((v.n, v.omega, v.square_omega, v.pass), (0, 0, 0, true));
    }

    #[test]
    fn verdict_json_uses_the_listed_field_names() {
        let v = verify_levinson(&PotentialSpec::<f64>::zero(), UniformGrid::new(10.0, 256).unwrap()).unwrap();
        let json = serde_json::to_value(&v).unwrap();
        for key in [
            "potential",
            "N",
            "omega",
            "square_omega",
            "pass",
            "reason",
            "diagnostics",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert_eq!(json["diagnostics"]["grid"]["N"], 256);
        let back: LevinsonVerdict<f64> = serde_json::from_value(json).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn identical_inputs_give_identical_verdicts() {
        let spec = PotentialSpec::gaussian(0.3, 0.0, 1.0);
        let g = UniformGrid::new(20.0, 1024).unwrap();
        let a = serde_json::to_string(&verify_levinson(&spec, g).unwrap()).unwrap();
        let b = serde_json::to_string(&verify_levinson(&spec, g).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn aliased_turn_is_propagated_not_rounded() {
        let c = (0.9 * 35.0 / 32.0f64).sqrt();
        let err = verify_levinson(
            &PotentialSpec::bump(c, -1.0, 1.0, 2.0),
            UniformGrid::new(20.0, 2048).unwrap(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnresolvedTurn { .. }), "{err}");
    }
}
