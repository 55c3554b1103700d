//! The radially truncated outgoing kernel and its closed-form Fourier
//! symbol.
//!
//! For truncation radius `L` the kernel is
//! `Phi_k^L(z) = 1_{|z| <= L} e^{ik|z|} / (4 pi |z|)` and its continuous
//! transform reduces to a 1-D radial integral:
//! `sigma(q) = (1/q) int_0^L e^{ikr} sin(qr) dr`, with
//! `sigma(0) = int_0^L r e^{ikr} dr`.

use crate::error::{Error, Result};
use crate::gridfield::GridSpec3;
use num_complex::Complex64;

/// `phi(x) = (e^x - 1) / x`, series below |x| = 0.5 to avoid cancellation.
fn phi(x: Complex64) -> Complex64 {
    if x.norm() < 0.5 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for j in 2..=20 {
            term *= x / j as f64;
            sum += term;
        }
        sum
    } else {
        (x.exp() - 1.0) / x
    }
}

/// `E(w) = int_0^L e^{iwr} dr = L phi(iwL)`.
fn segment_integral(w: Complex64, l: f64) -> Complex64 {
    l * phi(Complex64::new(0.0, 1.0) * w * l)
}

/// `J_n(L) = int_0^L r^n e^{ikr} dr` for n = 1, 3, 5 via the recursion
/// `J_n = (L^n e^{ikL} - n J_{n-1}) / (ik)`; used in the small-q series.
fn odd_moments(k: Complex64, l: f64) -> [Complex64; 3] {
    let ik = Complex64::new(0.0, 1.0) * k;
    let eikl = (ik * l).exp();
    let mut j_prev = segment_integral(k, l); // J_0
    let mut out = [Complex64::default(); 3];
    let mut ln = 1.0;
    for n in 1..=5 {
        ln *= l;
        let jn = (ln * eikl - n as f64 * j_prev) / ik;
        if n % 2 == 1 {
            out[(n - 1) / 2] = jn;
        }
        j_prev = jn;
    }
    out
}

/// Continuous Fourier symbol of the truncated kernel at radial frequency
/// `q = |xi|`.
pub fn truncated_symbol_value(k: Complex64, l_trunc: f64, q: f64) -> Complex64 {
    debug_assert!(q >= 0.0);
    if q * l_trunc < 1e-3 {
        // sin(qr)/q = r - q^2 r^3/6 + q^4 r^5/120 - ...
        let j = odd_moments(k, l_trunc);
        j[0] - j[1] * (q * q / 6.0) + j[2] * (q * q * q * q / 120.0)
    } else {
        let i = Complex64::new(0.0, 1.0);
        let plus = segment_integral(k + q, l_trunc);
        let minus = segment_integral(k - q, l_trunc);
        (plus - minus) / (2.0 * i * q)
    }
}

/// The symbol sampled on the grid's own frequency lattice.
///
/// `l_trunc` must stay within the padded-periodization safety margin
/// `2 * L_box`; callers are responsible for `l_trunc >=` the support
/// diameter so the truncation is exact on all relevant differences.
pub fn truncated_green_symbol(
    grid: &GridSpec3,
    k: Complex64,
    l_trunc: f64,
) -> Result<Vec<Complex64>> {
    check_truncation(grid, l_trunc)?;
    let n = grid.n();
    let mut out = vec![Complex64::default(); grid.node_count()];
    for jx in 0..n {
        for jy in 0..n {
            for jz in 0..n {
                let q = grid.freq_norm_sq(jx, jy, jz).sqrt();
                out[grid.idx(jx, jy, jz)] = truncated_symbol_value(k, l_trunc, q);
            }
        }
    }
    Ok(out)
}

pub(crate) fn check_truncation(grid: &GridSpec3, l_trunc: f64) -> Result<()> {
    if !(l_trunc > 0.0) {
        return Err(Error::Field(format!("truncation radius must be > 0, got {l_trunc}")));
    }
    if l_trunc > 2.0 * grid.l_box() + 1e-12 {
        return Err(Error::Field(format!(
            "truncation radius {l_trunc} exceeds the periodization margin {}",
            2.0 * grid.l_box()
        )));
    }
    Ok(())
}

/// Pointwise kernel value for z != 0.
#[inline]
pub(crate) fn kernel_value(k: Complex64, r: f64) -> Complex64 {
    (Complex64::new(0.0, 1.0) * k * r).exp() / (4.0 * std::f64::consts::PI * r)
}

/// Mean of the kernel over the ball of one cell volume centered at z = 0:
/// `int_{|z| <= r_c} Phi_k dz / dV = J_1(r_c) / dV`, the standard
/// equivalent-volume-sphere treatment of the integrable 1/|z| singularity.
pub(crate) fn singular_cell_average(k: Complex64, cell_volume: f64) -> Complex64 {
    let rc = (3.0 * cell_volume / (4.0 * std::f64::consts::PI)).powf(1.0 / 3.0);
    odd_moments(k, rc)[0] / cell_volume
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridfield::make_grid;
    use crate::quad::adaptive_simpson_complex;

    #[test]
    fn symbol_at_zero_matches_radial_moment() {
        // sigma(0) = int_0^L r e^{ikr} dr = (e^{ikL}(1 - ikL) - 1)/k^2
        let k = Complex64::new(3.0, 0.0);
        let l = 1.25;
        let direct = ((Complex64::new(0.0, 1.0) * k * l).exp()
            * (Complex64::new(1.0, 0.0) - Complex64::new(0.0, 1.0) * k * l)
            - 1.0)
            / (k * k);
        let quad = adaptive_simpson_complex(
            &|r| r * (Complex64::new(0.0, 1.0) * k * r).exp(),
            0.0,
            l,
            1e-12,
        );
        let sym = truncated_symbol_value(k, l, 0.0);
        assert!((sym - direct).norm() < 1e-10 * direct.norm());
        assert!((sym - quad).norm() < 1e-8 * quad.norm());
    }

    #[test]
    fn symbol_matches_radial_quadrature_at_generic_q() {
        let k = Complex64::new(5.0, 0.0);
        let l = 0.8;
        for q in [0.3, 4.9999, 5.0, 7.3, 40.0] {
            let quad = adaptive_simpson_complex(
                &|r| {
                    (Complex64::new(0.0, 1.0) * k * r).exp() * (q * r).sin() / q
                },
                0.0,
                l,
                1e-13,
            );
            let sym = truncated_symbol_value(k, l, q);
            assert!(
                (sym - quad).norm() < 1e-8 * quad.norm().max(1e-6),
                "q = {q}: {sym} vs {quad}"
            );
        }
    }

    #[test]
    fn symbol_matches_nested_3d_quadrature() {
        // Independent oracle: the 3-D integral of the truncated kernel
        // against e^{-i xi . z} reduced only once (polar angle kept as an
        // explicit inner integral).
        let k = Complex64::new(2.0, 0.0);
        let l = 0.6;
        let grid = make_grid(16, 1.0).unwrap();
        for (jx, jy, jz) in [(1, 0, 0), (2, 3, 1), (0, 5, 2)] {
            let q = grid.freq_norm_sq(jx, jy, jz).sqrt();
            let outer = adaptive_simpson_complex(
                &|r| {
                    let inner = adaptive_simpson_complex(
                        &|u| (Complex64::new(0.0, -1.0) * q * r * u).exp(),
                        -1.0,
                        1.0,
                        1e-11,
                    );
                    (Complex64::new(0.0, 1.0) * k * r).exp() * r / 2.0 * inner
                },
                0.0,
                l,
                1e-11,
            );
            let sym = truncated_symbol_value(k, l, q);
            assert!(
                (sym - outer).norm() < 1e-5 * outer.norm(),
                "xi index ({jx},{jy},{jz}): {sym} vs {outer}"
            );
        }
    }

    #[test]
    fn damped_kernel_shrinks_symbol_tail() {
        // Im k > 0 damps the kernel, so growing the truncation radius
        // changes the symbol less and less.
        let k = Complex64::new(4.0, 1.0);
        let q = 2.0;
        let s1 = truncated_symbol_value(k, 2.0, q);
        let s2 = truncated_symbol_value(k, 3.0, q);
        let s3 = truncated_symbol_value(k, 4.0, q);
        assert!((s3 - s2).norm() < (s2 - s1).norm());
        assert!((s3 - s2).norm() < 0.2 * s3.norm());
    }

    #[test]
    fn lattice_symbol_rejects_oversize_truncation() {
        let grid = make_grid(16, 1.0).unwrap();
        let k = Complex64::new(1.0, 0.0);
        assert!(truncated_green_symbol(&grid, k, 2.5).is_err());
        assert!(truncated_green_symbol(&grid, k, 2.0).is_ok());
    }
}
