//! Band-correlation estimation of the Fourier transform of the strength.
//!
//! The estimator is
//! `hhat(2 tau theta) ~ (16 pi^2 / k) int_k^{2k} (2s)^m
//!  u_inf(-theta, theta, s) conj(u_inf(-theta, theta, s + tau)) ds`,
//! evaluated by the trapezoid rule on the dataset's frequency grid with the
//! shifted factor linearly interpolated.

use crate::dataset::FarFieldDataset;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;

/// Sampled estimates of `hhat` on the polar grid `xi = 2 tau theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct HhatSamples {
    pub tau_grid: Vec<f64>,
    /// Antipodally paired directions `[d_0.., -d_0..]`.
    pub theta_grid: Vec<[f64; 3]>,
    /// Tau-major: `estimates[ti * n_theta + di]`, Hermitian-symmetrized.
    pub estimates: Vec<Complex64>,
    /// The frequency band `[k, 2k]` used by the estimator.
    pub k_band: (f64, f64),
}

impl HhatSamples {
    pub fn n_tau(&self) -> usize {
        self.tau_grid.len()
    }

    pub fn n_theta(&self) -> usize {
        self.theta_grid.len()
    }

    #[inline]
    pub fn estimate(&self, ti: usize, di: usize) -> Complex64 {
        self.estimates[ti * self.theta_grid.len() + di]
    }

    /// Sample location in frequency space.
    #[inline]
    pub fn xi(&self, ti: usize, di: usize) -> [f64; 3] {
        let t = 2.0 * self.tau_grid[ti];
        let d = self.theta_grid[di];
        [t * d[0], t * d[1], t * d[2]]
    }
}

/// Trapezoid over the frequency nodes of `ds` clipped to `[k, 2k]`, with
/// interpolated band endpoints.
fn band_trapezoid<F: Fn(f64) -> Result<Complex64>>(
    ds: &FarFieldDataset,
    k: f64,
    f: F,
) -> Result<Complex64> {
    let lo = k;
    let hi = 2.0 * k;
    let mut xs: Vec<f64> = vec![lo];
    xs.extend(
        ds.frequencies
            .iter()
            .copied()
            .filter(|s| *s > lo + 1e-12 && *s < hi - 1e-12),
    );
    xs.push(hi);
    let mut acc = Complex64::default();
    let mut prev_x = xs[0];
    let mut prev_f = f(prev_x)?;
    for &x in &xs[1..] {
        let fx = f(x)?;
        acc += (fx + prev_f) * (0.5 * (x - prev_x));
        prev_x = x;
        prev_f = fx;
    }
    Ok(acc)
}

/// Band correlation for one dataset direction at lag `tau` over `[k, 2k]`.
pub fn band_correlation(
    ds: &FarFieldDataset,
    dir: usize,
    tau: f64,
    k: f64,
) -> Result<Complex64> {
    if !(tau > 0.0 && tau < 0.5) {
        return Err(Error::Field(format!("tau = {tau} outside (0, 1/2)")));
    }
    if dir >= ds.n_dir() {
        return Err(Error::Field(format!("direction index {dir} out of range")));
    }
    let f = &ds.frequencies;
    if f.is_empty() || f[0] > k + 1e-12 || f[f.len() - 1] < 2.0 * k + tau - 1e-12 {
        return Err(Error::Coverage(format!(
            "dataset must cover [k, 2k + tau] = [{k}, {}]",
            2.0 * k + tau
        )));
    }
    let m = ds.meta.m;
    let integral = band_trapezoid(ds, k, |s| {
        let u = ds.interpolate(dir, s)?;
        let u_tau = ds.interpolate(dir, s + tau)?;
        Ok((2.0 * s).powf(m) * u * u_tau.conj())
    })?;
    Ok(integral * (16.0 * std::f64::consts::PI * std::f64::consts::PI / k))
}

/// Picks the highest band `[k, 2k]` with `2k + tau_max` still covered.
fn highest_band(ds: &FarFieldDataset, tau_max: f64) -> Result<f64> {
    let f = &ds.frequencies;
    if f.len() < 2 {
        return Err(Error::Coverage("dataset has fewer than 2 frequencies".into()));
    }
    let k = (f[f.len() - 1] - tau_max) / 2.0;
    if !(k > 0.0) || k < f[0] - 1e-12 {
        return Err(Error::Coverage(format!(
            "no admissible band: grid [{}, {}] too narrow for tau_max {tau_max}",
            f[0],
            f[f.len() - 1]
        )));
    }
    Ok(k)
}

/// Band-correlation estimates on the `(tau, theta)` product grid from the
/// highest admissible band of `ds`, Hermitian-symmetrized over antipodal
/// direction pairs (so the reconstructed strength is real).
pub fn estimate_hhat(ds: &FarFieldDataset, n_tau: usize, n_theta: usize) -> Result<HhatSamples> {
    if n_tau < 4 || n_theta < 6 {
        return Err(Error::Field(format!(
            "estimation grid too coarse: n_tau = {n_tau} (>= 4), n_theta = {n_theta} (>= 6)"
        )));
    }
    if n_theta % 2 != 0 {
        return Err(Error::Field("n_theta must be even (antipodal pairs)".into()));
    }
    let ds_half = ds.n_dir() / 2;
    let half = n_theta / 2;
    if half > ds_half {
        return Err(Error::Coverage(format!(
            "dataset holds {} direction pairs, need {half}",
            ds_half
        )));
    }
    // Selected directions: the first `half` and their antipodes.
    let mut theta_grid = Vec::with_capacity(n_theta);
    let mut dir_index = Vec::with_capacity(n_theta);
    for i in 0..half {
        theta_grid.push(ds.directions[i]);
        dir_index.push(i);
    }
    for i in 0..half {
        let j = ds_half + i;
        let d = ds.directions[j];
        let neg = ds.directions[i];
        if (d[0] + neg[0]).abs() + (d[1] + neg[1]).abs() + (d[2] + neg[2]).abs() > 1e-9 {
            return Err(Error::Mismatch(
                "dataset directions are not antipodally paired".into(),
            ));
        }
        theta_grid.push(d);
        dir_index.push(j);
    }

    let tau_max = 0.45;
    let tau_grid: Vec<f64> = (0..n_tau)
        .map(|j| tau_max * (j + 1) as f64 / n_tau as f64)
        .collect();
    let k = highest_band(ds, tau_max)?;

    let cells: Vec<Result<Complex64>> = (0..n_tau * n_theta)
        .into_par_iter()
        .map(|cell| {
            let ti = cell / n_theta;
            let di = cell % n_theta;
            band_correlation(ds, dir_index[di], tau_grid[ti], k)
        })
        .collect();
    let mut estimates = cells.into_iter().collect::<Result<Vec<_>>>()?;

    // Hermitian symmetrization: hhat(-xi) = conj(hhat(xi)) exactly.
    for ti in 0..n_tau {
        for di in 0..half {
            let a = ti * n_theta + di;
            let b = ti * n_theta + half + di;
            let sym = 0.5 * (estimates[a] + estimates[b].conj());
            estimates[a] = sym;
            estimates[b] = sym.conj();
        }
    }

    Ok(HhatSamples {
        tau_grid,
        theta_grid,
        estimates,
        k_band: (k, 2.0 * k),
    })
}

/// Locates a dataset direction by vector, for callers that hold a vector
/// rather than an index.
pub fn find_direction(ds: &FarFieldDataset, theta: [f64; 3]) -> Option<usize> {
    ds.directions.iter().position(|d| {
        (d[0] - theta[0]).abs() + (d[1] - theta[1]).abs() + (d[2] - theta[2]).abs() < 1e-12
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{DatasetMeta, SweepMethod, SweepSummary};

    fn dataset_with(values: impl Fn(usize, f64) -> Complex64, nk: usize) -> FarFieldDataset {
        let directions = crate::sphere::antipodal_directions(6);
        let frequencies: Vec<f64> = (0..nk).map(|j| 4.0 + 0.05 * j as f64).collect();
        let vals = (0..directions.len())
            .flat_map(|d| {
                frequencies
                    .iter()
                    .map(move |&s| (d, s))
                    .collect::<Vec<_>>()
            })
            .map(|(d, s)| values(d, s))
            .collect();
        FarFieldDataset {
            directions,
            frequencies,
            values: vals,
            meta: DatasetMeta {
                m: 3.0,
                grid_n: 16,
                grid_l: 0.7,
                seed: 0,
                method: SweepMethod::Born0,
                tol: 0.0,
                summary: SweepSummary::default(),
            },
        }
    }

    #[test]
    fn zero_dataset_gives_zero_correlation() {
        let ds = dataset_with(|_, _| Complex64::default(), 200);
        let v = band_correlation(&ds, 0, 0.25, 4.5).unwrap();
        assert_eq!(v, Complex64::default());
    }

    #[test]
    fn constant_dataset_matches_closed_form() {
        // u == 1: correlation = (16 pi^2 / k) int_k^{2k} (2s)^3 ds
        //        = (16 pi^2 / k) * 2 * (16 k^4 - k^4) = 480 pi^2 k^3.
        let ds = dataset_with(|_, _| Complex64::new(1.0, 0.0), 200);
        let k = 4.5;
        let v = band_correlation(&ds, 2, 0.2, k).unwrap();
        let expected = 480.0 * std::f64::consts::PI.powi(2) * k.powi(3);
        // Trapezoid on a 0.05 grid of a smooth integrand: well under 1%.
        assert!(
            (v.re - expected).abs() < 1e-4 * expected,
            "{} vs {expected}",
            v.re
        );
        assert!(v.im.abs() < 1e-9 * expected);
    }

    #[test]
    fn correlation_rejects_uncovered_band() {
        let ds = dataset_with(|_, _| Complex64::new(1.0, 0.0), 50);
        // grid tops out at 6.45; band [4, 8.25] not covered
        assert!(matches!(
            band_correlation(&ds, 0, 0.25, 4.0),
            Err(Error::Coverage(_))
        ));
        assert!(band_correlation(&ds, 0, 0.6, 2.5).is_err());
    }

    #[test]
    fn symmetrization_is_exact() {
        let ds = dataset_with(
            |d, s| Complex64::new((d as f64 + 1.0) * s.sin(), (s * 0.3).cos() * 0.2),
            200,
        );
        let hh = estimate_hhat(&ds, 4, 6).unwrap();
        let half = hh.n_theta() / 2;
        for ti in 0..hh.n_tau() {
            for di in 0..half {
                let a = hh.estimate(ti, di);
                let b = hh.estimate(ti, half + di);
                assert_eq!(a, b.conj());
            }
        }
    }

    #[test]
    fn estimate_rejects_coarse_grids() {
        let ds = dataset_with(|_, _| Complex64::default(), 200);
        assert!(estimate_hhat(&ds, 3, 6).is_err());
        assert!(estimate_hhat(&ds, 4, 4).is_err());
        assert!(estimate_hhat(&ds, 4, 7).is_err());
    }

    #[test]
    fn band_picks_highest_admissible_k() {
        let ds = dataset_with(|_, _| Complex64::default(), 200);
        let hh = estimate_hhat(&ds, 4, 6).unwrap();
        let fmax = *ds.frequencies.last().unwrap();
        assert!((hh.k_band.0 - (fmax - 0.45) / 2.0).abs() < 1e-12);
    }
}
