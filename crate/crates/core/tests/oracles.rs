//! Library results against reference values computed without the grid.

mod common;

use common::*;
use friedrichs::cauchy::boundary_values;
use friedrichs::grid::UniformGrid;
use friedrichs::potential::{sample_potential, PotentialSpec};
use friedrichs::scattering::scattering_matrix;
use friedrichs::spectrum::{eigenvalue_search, numerical_threshold};

#[test]
fn quadrature_oracle_reproduces_the_beta_integral() {
    // ∫(1-y)³(1+y)⁴ dy = 2⁸·B(4,5) = 32/35.
    assert!((bump_threshold_oracle(1.0) - 35.0 / 32.0).abs() <= 1e-12);
}

#[test]
fn boundary_values_match_the_dawson_closed_form() {
    let g = UniformGrid::<f64>::new(20.0, 2048).unwrap();
    for c in [0.3, 1.0, 2.0] {
        let p = sample_potential(&PotentialSpec::gaussian(c, 0.0, 1.0), g).unwrap();
        let bv = boundary_values(&p).unwrap();
        for k in (0..2048).step_by(37) {
            let x = g.x(k);
            if x.abs() > 8.0 {
                continue;
            }
            let (re, im) = gaussian_i_plus(c, x);
            let scale = 1.0 + c * c;
            assert!(
                (bv.i_plus[k].re - re).abs() <= 1e-8 * scale,
                "c={c} x={x}: {} vs {re}",
                bv.i_plus[k].re
            );
            assert!((bv.i_plus[k].im - im).abs() <= 1e-12 * scale);
        }
    }
}

#[test]
fn bump_eigenvalues_match_the_scan_and_bisect_oracle() {
    let g = UniformGrid::<f64>::new(20.0, 2048).unwrap();
    for factor in [1.5, 4.0, 10.0] {
        let c = (factor * bump_threshold_oracle(1.0)).sqrt();
        let reference = bump_eigenvalues_oracle(c);
        assert_eq!(reference.len(), 1, "factor {factor}: {reference:?}");
        let p = sample_potential(&PotentialSpec::bump(c, -1.0, 1.0, 2.0), g).unwrap();
        let bv = boundary_values(&p).unwrap();
        let report = eigenvalue_search(&p, &bv).unwrap();
        assert_eq!(report.count, 1);
        let lambda = report.eigenvalues[0].lambda;
        assert!(
            (lambda - reference[0]).abs() <= 1e-6,
            "factor {factor}: {lambda} vs {}",
            reference[0]
        );
    }
}

#[test]
fn below_threshold_neither_side_finds_an_eigenvalue() {
    let c = (0.5 * bump_threshold_oracle(1.0)).sqrt();
    assert!(bump_eigenvalues_oracle(c).is_empty());
    let g = UniformGrid::<f64>::new(20.0, 2048).unwrap();
    let p = sample_potential(&PotentialSpec::bump(c, -1.0, 1.0, 2.0), g).unwrap();
    let bv = boundary_values(&p).unwrap();
    assert_eq!(eigenvalue_search(&p, &bv).unwrap().count, 0);
}

#[test]
fn numerical_threshold_converges_to_the_oracle_under_refinement() {
    let exact = bump_threshold_oracle(1.0);
    let mut errors = Vec::new();
    for n in [1024, 2048, 4096] {
        let g = UniformGrid::new(20.0, n).unwrap();
        let p = sample_potential(&PotentialSpec::bump(1.0, -1.0, 1.0, 2.0), g).unwrap();
        let bv = boundary_values(&p).unwrap();
        let t = numerical_threshold(&p, &bv).unwrap().unwrap();
        errors.push((t - exact).abs() / exact);
    }
    assert!(errors[2] < errors[0], "{errors:?}");
    assert!(errors[2] < 2e-2, "{errors:?}");
}

#[test]
fn weak_coupling_scattering_is_close_to_the_born_term() {
    // S - 1 ≈ -2πi|u|² to first order in the coupling.
    let g = UniformGrid::<f64>::new(20.0, 2048).unwrap();
    let c = 0.01;
    let p = sample_potential(&PotentialSpec::gaussian(c, 0.0, 1.0), g).unwrap();
    let bv = boundary_values(&p).unwrap();
    let s = scattering_matrix(&p, &bv).unwrap();
    for k in (0..2048).step_by(101) {
        let x = g.x(k);
        let born = -2.0 * std::f64::consts::PI * c * c * (-x * x).exp();
        assert!((s.s[k].im - born).abs() <= 1e-6, "x={x}");
    }
}
