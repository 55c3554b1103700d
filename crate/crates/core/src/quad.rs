//! Adaptive quadrature used by the startup constants and the test oracles.

use num_complex::Complex64;

/// Adaptive Simpson rule on `[a, b]` with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
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
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson for complex-valued integrands.
pub fn adaptive_simpson_complex<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
) -> Complex64 {
    let re = adaptive_simpson(&|x| f(x).re, a, b, tol);
    let im = adaptive_simpson(&|x| f(x).im, a, b, tol);
    Complex64::new(re, im)
}

/// Integrates an oscillatory integrand over `[a, b]` by summing adaptive
/// panels of width `chunk` (roughly one half-period each), so the adaptive
/// rule never has to straddle many oscillations at once.
pub fn integrate_oscillatory<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    chunk: f64,
    tol: f64,
) -> f64 {
    assert!(chunk > 0.0 && b >= a);
    let n = ((b - a) / chunk).ceil().max(1.0) as usize;
    let panel_tol = tol / n as f64;
    let mut total = 0.0;
    let mut left = a;
    for i in 1..=n {
        let right = if i == n { b } else { a + chunk * i as f64 };
        total += adaptive_simpson(f, left, right, panel_tol);
        left = right;
    }
    total
}
