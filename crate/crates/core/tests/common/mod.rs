//! Independent reference computations shared by the integration suites.
//! Nothing here touches the grid machinery of the library.

#![allow(dead_code)]

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 48)
}

/// `(1 - y²)^4`, the squared profile of the unit bump `(1 - y²)²`.
pub fn bump_weight(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - y * y).powi(4)
    }
}

/// Coupling `g*` at which `c(1-y²)²` binds: `g*·c²·∫(1-y²)⁴/(1-y) dy = 1`.
pub fn bump_threshold_oracle(c: f64) -> f64 {
    let integral = adaptive_simpson(&|y| (1.0 - y).powi(3) * (1.0 + y).powi(4), -1.0, 1.0, 1e-15);
    1.0 / (c * c * integral)
}

/// Eigenvalue of `X + c²⟨u,·⟩u` for the unit bump, from a dense scan of
/// `1 - c²∫(1-y²)⁴/(λ-y) dy` on `(1, 60]` and bisection.
pub fn bump_eigenvalues_oracle(c: f64) -> Vec<f64> {
    let g = |lambda: f64| 1.0 - c * c * adaptive_simpson(&|y| bump_weight(y) / (lambda - y), -1.0, 1.0, 1e-14);
    let mut roots = Vec::new();
    let mut a = 1.0 + 1e-6;
    let mut ga = g(a);
    for k in 1..=5900 {
        let b = 1.0 + 0.01 * k as f64;
        let gb = g(b);
        if ga.signum() != gb.signum() {
            let (mut lo, mut hi) = (a, b);
            while hi - lo > 1e-13 {
                let m = 0.5 * (lo + hi);
                if g(m).signum() == ga.signum() {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        a = b;
        ga = gb;
    }
    roots
}

/// Dawson's integral `F(x) = e^{-x²}∫₀ˣ e^{t²} dt`.
pub fn dawson(x: f64) -> f64 {
    let sign = x.signum();
    let x = x.abs();
    // Split to keep the integrand moderate.
    let integral = adaptive_simpson(&|t| (t * t - x * x).exp(), 0.0, x, 1e-15);
    sign * integral
}

/// `I₊(x)` for `|u|² = c²e^{-y²}`: `c²(2√π F(x) - iπe^{-x²})`.
pub fn gaussian_i_plus(c: f64, x: f64) -> (f64, f64) {
    let pi = std::f64::consts::PI;
    (c * c * 2.0 * pi.sqrt() * dawson(x), -c * c * pi * (-x * x).exp())
}
