//! Backscattered far-field data discrepancy between two datasets.

use crate::dataset::FarFieldDataset;
use crate::error::{Error, Result};
use crate::sphere;
use num_complex::Complex64;

/// Default lag grid: 8 points in (0, 0.45].
pub fn default_tau_grid() -> Vec<f64> {
    (1..=8).map(|j| 0.45 * j as f64 / 8.0).collect()
}

/// Band discrepancy at one `(k, tau)`:
/// `(1/k) int_k^{2k} sum_theta w_theta |s^m U(s, theta, tau)|^2 ds` with
/// `U = conj(u1(s+tau)) u1(s) - conj(u2(s+tau)) u2(s)`.
pub fn epsilon_band(
    ds1: &FarFieldDataset,
    ds2: &FarFieldDataset,
    k: f64,
    tau: f64,
) -> Result<f64> {
    if !ds1.same_grids(ds2) {
        return Err(Error::Mismatch("datasets use different grids".into()));
    }
    if ds1.meta.m != ds2.meta.m {
        return Err(Error::Mismatch("datasets use different orders m".into()));
    }
    if !(tau > 0.0 && tau < 0.5) {
        return Err(Error::Field(format!("tau = {tau} outside (0, 1/2)")));
    }
    let f = &ds1.frequencies;
    if f.is_empty() || f[0] > k + 1e-12 || f[f.len() - 1] < 2.0 * k + tau - 1e-12 {
        return Err(Error::Coverage(format!(
            "datasets must cover [k, 2k + tau] = [{k}, {}]",
            2.0 * k + tau
        )));
    }
    let m = ds1.meta.m;
    let n_dir = ds1.n_dir();
    let w_dir = sphere::uniform_weight(n_dir);

    let integrand = |s: f64| -> Result<f64> {
        let mut sum = 0.0;
        for d in 0..n_dir {
            let a = ds1.interpolate(d, s)?;
            let a_tau = ds1.interpolate(d, s + tau)?;
            let b = ds2.interpolate(d, s)?;
            let b_tau = ds2.interpolate(d, s + tau)?;
            let u: Complex64 = a_tau.conj() * a - b_tau.conj() * b;
            sum += u.norm_sqr();
        }
        Ok(s.powf(2.0 * m) * w_dir * sum)
    };

    // Trapezoid over the grid nodes clipped to [k, 2k].
    let lo = k;
    let hi = 2.0 * k;
    let mut xs: Vec<f64> = vec![lo];
    xs.extend(
        f.iter()
            .copied()
            .filter(|s| *s > lo + 1e-12 && *s < hi - 1e-12),
    );
    xs.push(hi);
    let mut acc = 0.0;
    let mut prev_x = xs[0];
    let mut prev_f = integrand(prev_x)?;
    for &x in &xs[1..] {
        let fx = integrand(x)?;
        acc += 0.5 * (fx + prev_f) * (x - prev_x);
        prev_x = x;
        prev_f = fx;
    }
    Ok(acc / k)
}

/// Discrete data discrepancy
/// `eps^2 = sup_{k in I, tau} eps^2(k, tau)` over the dataset k-grid
/// restricted to the interval `I = (k0, k_upper]` (subsampled by `k_stride`
/// to keep the sup affordable; a further discretization of the continuum
/// sup, hence a lower bound).
pub fn data_discrepancy(
    ds1: &FarFieldDataset,
    ds2: &FarFieldDataset,
    interval: (f64, f64),
    tau_grid: &[f64],
    k_stride: usize,
) -> Result<f64> {
    if !ds1.same_grids(ds2) {
        return Err(Error::Mismatch("datasets use different grids".into()));
    }
    let (k0, k_upper) = interval;
    if !(k0 <= k_upper) {
        return Err(Error::Field(format!("interval ({k0}, {k_upper}] is empty")));
    }
    let tau_max = tau_grid.iter().cloned().fold(0.0, f64::max);
    let f_max = *ds1
        .frequencies
        .last()
        .ok_or_else(|| Error::Coverage("empty frequency grid".into()))?;
    let stride = k_stride.max(1);
    let mut candidates: Vec<f64> = ds1
        .frequencies
        .iter()
        .copied()
        .step_by(stride)
        .filter(|&k| k > k0 && k <= k_upper + 1e-12 && 2.0 * k + tau_max <= f_max + 1e-9)
        .collect();
    // Keep the band edge itself in the candidate set.
    if k_upper > k0 + 1e-12 || candidates.is_empty() {
        if 2.0 * k_upper + tau_max <= f_max + 1e-9
            && ds1.frequencies[0] <= k_upper
            && !candidates.iter().any(|&c| (c - k_upper).abs() < 1e-12)
        {
            candidates.push(k_upper);
        }
    }
    if candidates.is_empty() {
        return Err(Error::Coverage(format!(
            "no admissible k in ({k0}, {k_upper}] with coverage up to {f_max}"
        )));
    }
    let mut sup = 0.0f64;
    for &k in &candidates {
        for &tau in tau_grid {
            sup = sup.max(epsilon_band(ds1, ds2, k, tau)?);
        }
    }
    Ok(sup)
}
