//! Ergodic band statistics: `Y_k = k^{eps-1} int_k^{2k} X_s ds` for the
//! centered squared far-field process `X_s = s^m (U_s^2 - E U_s^2)`, the
//! covariance-decay verification, the exceedance-probability harness, and
//! a synthetic Gaussian process with exactly computable covariance for
//! unit-testing the ergodicity conclusion.

use crate::dataset::FarFieldDataset;
use crate::error::{Error, Result};
use crate::rng::NormalStream;
use crate::stats::log_log_slope;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// The eight real/imaginary combinations of `Z_k` and `Z_{k+tau}` whose
/// squares decompose the correlation difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AComponent {
    ReZ,
    ImZ,
    ReZTau,
    ImZTau,
    ReDiff,
    ImDiff,
    ReTauPlusImZ,
    ImTauMinusReZ,
}

impl AComponent {
    pub const ALL: [AComponent; 8] = [
        AComponent::ReZ,
        AComponent::ImZ,
        AComponent::ReZTau,
        AComponent::ImZTau,
        AComponent::ReDiff,
        AComponent::ImDiff,
        AComponent::ReTauPlusImZ,
        AComponent::ImTauMinusReZ,
    ];

    pub fn evaluate(&self, z: Complex64, z_tau: Complex64) -> f64 {
        match self {
            AComponent::ReZ => z.re,
            AComponent::ImZ => z.im,
            AComponent::ReZTau => z_tau.re,
            AComponent::ImZTau => z_tau.im,
            AComponent::ReDiff => z.re - z_tau.re,
            AComponent::ImDiff => z.im - z_tau.im,
            AComponent::ReTauPlusImZ => z_tau.re + z.im,
            AComponent::ImTauMinusReZ => z_tau.im - z.re,
        }
    }
}

/// One band statistic value with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandStatistic {
    pub k: f64,
    pub epsilon_exp: f64,
    pub value: f64,
    pub component: AComponent,
}

impl BandStatistic {
    /// Validated record: the exceedance machinery requires eps in
    /// (0, 1/4) and a finite value.
    pub fn new(k: f64, epsilon_exp: f64, value: f64, component: AComponent) -> Result<Self> {
        if !(epsilon_exp > 0.0 && epsilon_exp < 0.25) {
            return Err(Error::Field(format!(
                "epsilon exponent {epsilon_exp} outside (0, 1/4)"
            )));
        }
        if !value.is_finite() {
            return Err(Error::Field("band statistic must be finite".into()));
        }
        Ok(BandStatistic {
            k,
            epsilon_exp,
            value,
            component,
        })
    }
}

/// Path source for the ergodic harness.
#[derive(Debug, Clone)]
pub enum ProcessSampler {
    /// Centered squared far-field component process; one path per
    /// ensemble member on the data frequency grid.
    Born0FarField {
        dir: usize,
        tau: f64,
        component: AComponent,
    },
    /// OU-mixture synthetic process on an explicit uniform grid; one path
    /// per `(seed, index)` stream.
    SyntheticOu {
        c1: f64,
        c2: f64,
        t0: f64,
        step: f64,
        len: usize,
        seed: u64,
        n_paths: usize,
    },
}

impl ProcessSampler {
    /// Real-valued paths on a uniform s-grid. The far-field variant reads
    /// the ensemble (and ignores nothing else); the synthetic variant
    /// ignores the ensemble.
    pub fn sample(&self, ensemble: &[FarFieldDataset]) -> Result<Vec<SampledPath>> {
        match self {
            ProcessSampler::Born0FarField { dir, tau, component } => {
                centered_square_process(ensemble, *dir, *tau, *component)
            }
            ProcessSampler::SyntheticOu {
                c1,
                c2,
                t0,
                step,
                len,
                seed,
                n_paths,
            } => synthetic_ou_paths(*c1, *c2, *t0, *step, *len, *seed, *n_paths),
        }
    }
}

/// A real-valued process sampled on a uniform grid `t0 + j * step`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    pub t0: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl SampledPath {
    pub fn t_end(&self) -> f64 {
        self.t0 + self.step * (self.values.len() - 1) as f64
    }

    /// Linear interpolation inside the covered range.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        if t < self.t0 - 1e-12 || t > self.t_end() + 1e-12 {
            return Err(Error::Coverage(format!(
                "t = {t} outside path range [{}, {}]",
                self.t0,
                self.t_end()
            )));
        }
        let u = ((t - self.t0) / self.step).clamp(0.0, (self.values.len() - 1) as f64);
        let j = (u.floor() as usize).min(self.values.len() - 2);
        let frac = u - j as f64;
        Ok(self.values[j] * (1.0 - frac) + self.values[j + 1] * frac)
    }

    /// Every `factor`-th node; used by refinement checks.
    pub fn subsample(&self, factor: usize) -> SampledPath {
        SampledPath {
            t0: self.t0,
            step: self.step * factor as f64,
            values: self.values.iter().step_by(factor).copied().collect(),
        }
    }
}

/// Trapezoid of the path over `[k, 2k]` scaled by `k^{eps - 1}`.
/// Requires coverage of the band at step <= 0.05.
pub fn band_statistic(path: &SampledPath, k: f64, eps: f64) -> Result<f64> {
    if path.step > 0.05 + 1e-12 {
        return Err(Error::Coverage(format!(
            "path step {} exceeds the 0.05 resolution requirement",
            path.step
        )));
    }
    if path.t0 > k + 1e-12 || path.t_end() < 2.0 * k - 1e-12 {
        return Err(Error::Coverage(format!(
            "path [{}, {}] does not cover the band [{k}, {}]",
            path.t0,
            path.t_end(),
            2.0 * k
        )));
    }
    let lo = k;
    let hi = 2.0 * k;
    let first = ((lo - path.t0) / path.step).ceil() as usize;
    let last = ((hi - path.t0) / path.step).floor() as usize;
    let mut xs = vec![lo];
    for j in first..=last {
        let t = path.t0 + j as f64 * path.step;
        if t > lo + 1e-12 && t < hi - 1e-12 {
            xs.push(t);
        }
    }
    xs.push(hi);
    let mut acc = 0.0;
    let mut prev_t = xs[0];
    let mut prev_v = path.value_at(prev_t)?;
    for &t in &xs[1..] {
        let v = path.value_at(t)?;
        acc += 0.5 * (v + prev_v) * (t - prev_t);
        prev_t = t;
        prev_v = v;
    }
    Ok(acc * k.powf(eps - 1.0))
}

/// Per-realization paths of `X_s = s^m (U_s^2 - E_loo U_s^2)` from an
/// ensemble of datasets sharing grids, with the ensemble expectation
/// replaced by the leave-one-out mean (bias O(1/R)).
pub fn centered_square_process(
    ensemble: &[FarFieldDataset],
    dir: usize,
    tau: f64,
    component: AComponent,
) -> Result<Vec<SampledPath>> {
    if ensemble.len() < 100 {
        return Err(Error::Mismatch(format!(
            "need >= 100 datasets to estimate E U^2, got {}",
            ensemble.len()
        )));
    }
    let first = &ensemble[0];
    if ensemble.iter().any(|ds| !ds.same_grids(first)) {
        return Err(Error::Mismatch("ensemble datasets use different grids".into()));
    }
    let m = first.meta.m;
    let freqs = &first.frequencies;
    if freqs.len() < 2 {
        return Err(Error::Coverage("frequency grid too short".into()));
    }
    let step = freqs[1] - freqs[0];
    // Usable s-range: s + tau must stay on the grid.
    let s_max = freqs[freqs.len() - 1] - tau;
    let usable: Vec<f64> = freqs.iter().copied().filter(|s| *s <= s_max + 1e-12).collect();
    if usable.len() < 2 {
        return Err(Error::Coverage("no usable band after the tau shift".into()));
    }

    let r = ensemble.len();
    // u[i][j]: component value for realization i at s_j.
    let u: Vec<Vec<f64>> = ensemble
        .par_iter()
        .map(|ds| -> Result<Vec<f64>> {
            usable
                .iter()
                .enumerate()
                .map(|(j, &s)| {
                    let z = ds.value(dir, j);
                    let z_tau = ds.interpolate(dir, s + tau)?;
                    Ok(component.evaluate(z, z_tau))
                })
                .collect()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;

    let ns = usable.len();
    let mut sum_sq = vec![0.0; ns];
    for row in &u {
        for (acc, v) in sum_sq.iter_mut().zip(row) {
            *acc += v * v;
        }
    }
    let paths = u
        .iter()
        .map(|row| {
            let values = row
                .iter()
                .zip(usable.iter())
                .enumerate()
                .map(|(j, (v, &s))| {
                    let loo_mean = (sum_sq[j] - v * v) / (r as f64 - 1.0);
                    s.powf(m) * (v * v - loo_mean)
                })
                .collect();
            SampledPath {
                t0: usable[0],
                step,
                values,
            }
        })
        .collect();
    Ok(paths)
}

/// Empirical covariance of the centered process at the given lags, with
/// the smallest constant satisfying the `C (1 + lag)^{-1}` envelope and a
/// log-log fitted exponent against `1 + lag`.
#[derive(Debug, Clone)]
pub struct DecayReport {
    pub lags: Vec<f64>,
    pub covariance: Vec<f64>,
    pub fitted_exponent: Option<f64>,
    pub bound_constant: f64,
}

pub fn covariance_decay_check(paths: &[SampledPath], lags: &[f64]) -> Result<DecayReport> {
    if paths.len() < 200 {
        return Err(Error::Mismatch(format!(
            "need >= 200 realizations, got {}",
            paths.len()
        )));
    }
    let step = paths[0].step;
    let len = paths[0].values.len();
    if paths.iter().any(|p| p.step != step || p.values.len() != len) {
        return Err(Error::Mismatch("paths use different grids".into()));
    }
    let mut covariance = Vec::with_capacity(lags.len());
    for &lag in lags {
        let shift = (lag / step).round() as usize;
        if shift >= len {
            return Err(Error::Coverage(format!("lag {lag} exceeds the path span")));
        }
        let mut acc = 0.0;
        let mut count = 0usize;
        for p in paths {
            for j in 0..len - shift {
                acc += p.values[j] * p.values[j + shift];
                count += 1;
            }
        }
        covariance.push(acc / count as f64);
    }
    let bound_constant = lags
        .iter()
        .zip(&covariance)
        .map(|(l, c)| c * (1.0 + l))
        .fold(0.0, f64::max);
    let shifted: Vec<f64> = lags.iter().map(|l| 1.0 + l).collect();
    let fitted_exponent = log_log_slope(&shifted, &covariance);
    Ok(DecayReport {
        lags: lags.to_vec(),
        covariance,
        fitted_exponent,
        bound_constant,
    })
}

/// Band statistics for every k in `k_grid`.
pub fn band_statistics_over_grid(
    path: &SampledPath,
    k_grid: &[f64],
    eps: f64,
) -> Result<Vec<f64>> {
    k_grid.iter().map(|&k| band_statistic(path, k, eps)).collect()
}

/// Fraction of realizations with `max_{k >= k_tilde} |Y_k| >= 1` over the
/// sampled k-grid. Evaluated on nested tails of the same realizations, the
/// fraction is non-increasing in `k_tilde` by construction.
pub fn exceedance_probability(
    y_samples: &[Vec<f64>],
    k_grid: &[f64],
    k_tilde: f64,
) -> f64 {
    let hits = y_samples
        .iter()
        .filter(|ys| {
            ys.iter()
                .zip(k_grid)
                .any(|(y, k)| *k >= k_tilde && y.abs() >= 1.0)
        })
        .count();
    hits as f64 / y_samples.len().max(1) as f64
}

/// OU-mixture synthetic process: `X_t = (1+t)^{c1/2} sum_j sqrt(w_j) xi_j(t)`
/// with independent unit-variance OU components `xi_j` of rate `lambda_j`.
/// The weights follow the Gamma-mixture of `(1 + u)^{-c2}`, so the designed
/// covariance `env(s) env(t) sum_j w_j e^{-lambda_j |s - t|}` satisfies the
/// ergodicity hypothesis `|E X_s X_t| <~ (s^{c1} + t^{c1})/(1 + |s-t|^{c2})`.
#[derive(Debug, Clone)]
pub struct OuMixture {
    pub c1: f64,
    pub c2: f64,
    lambdas: Vec<f64>,
    weights: Vec<f64>,
}

const OU_COMPONENTS: usize = 32;
const OU_LAMBDA_MIN: f64 = 1e-4;
const OU_LAMBDA_MAX: f64 = 8.0;

impl OuMixture {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        if !(0.0 <= c1 && 2.0 * c1 < c2 && c2 < 1.0) {
            return Err(Error::Field(format!(
                "need 0 <= 2 c1 < c2 < 1, got c1 = {c1}, c2 = {c2}"
            )));
        }
        let dv = (OU_LAMBDA_MAX / OU_LAMBDA_MIN).ln() / (OU_COMPONENTS - 1) as f64;
        let lambdas: Vec<f64> = (0..OU_COMPONENTS)
            .map(|j| OU_LAMBDA_MIN * (dv * j as f64).exp())
            .collect();
        // Gamma-mixture weights t^{c2} e^{-t} dlog t, normalized to unit
        // variance at lag 0.
        let mut weights: Vec<f64> = lambdas.iter().map(|t| t.powf(c2) * (-t).exp() * dv).collect();
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        Ok(OuMixture {
            c1,
            c2,
            lambdas,
            weights,
        })
    }

    fn envelope(&self, t: f64) -> f64 {
        (1.0 + t).powf(self.c1 / 2.0)
    }

    /// Exactly computable covariance of the generated process.
    pub fn designed_covariance(&self, s: f64, t: f64) -> f64 {
        let lag = (s - t).abs();
        let mix: f64 = self
            .lambdas
            .iter()
            .zip(&self.weights)
            .map(|(l, w)| w * (-l * lag).exp())
            .sum();
        self.envelope(s) * self.envelope(t) * mix
    }

    /// One path on the uniform grid `t0 + j * step`, exact OU stepping,
    /// deterministic in `(seed, stream)`.
    pub fn sample_path(
        &self,
        t0: f64,
        step: f64,
        len: usize,
        seed: u64,
        stream: u64,
    ) -> SampledPath {
        let mut rng = NormalStream::new(seed, stream);
        let mut state: Vec<f64> = (0..OU_COMPONENTS).map(|_| rng.next()).collect();
        let decay: Vec<f64> = self.lambdas.iter().map(|l| (-l * step).exp()).collect();
        let kick: Vec<f64> = decay.iter().map(|a| (1.0 - a * a).sqrt()).collect();
        let sqrt_w: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let mut values = Vec::with_capacity(len);
        for j in 0..len {
            let t = t0 + j as f64 * step;
            let mix: f64 = state.iter().zip(&sqrt_w).map(|(x, sw)| x * sw).sum();
            values.push(self.envelope(t) * mix);
            if j + 1 < len {
                for (c, (a, b)) in state.iter_mut().zip(decay.iter().zip(&kick)) {
                    *c = a * *c + b * rng.next();
                }
            }
        }
        SampledPath { t0, step, values }
    }
}

/// Synthetic hypothesis-satisfying paths, parallel over path index.
pub fn synthetic_ou_paths(
    c1: f64,
    c2: f64,
    t0: f64,
    step: f64,
    len: usize,
    seed: u64,
    n_paths: usize,
) -> Result<Vec<SampledPath>> {
    let mix = OuMixture::new(c1, c2)?;
    Ok((0..n_paths)
        .into_par_iter()
        .map(|i| mix.sample_path(t0, step, len, seed, i as u64))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Acc;

    #[test]
    fn zero_and_constant_paths_have_closed_forms() {
        let path = SampledPath {
            t0: 0.0,
            step: 0.05,
            values: vec![0.0; 2001],
        };
        assert_eq!(band_statistic(&path, 10.0, 0.2).unwrap(), 0.0);
        let c = 3.5;
        let path_c = SampledPath {
            t0: 0.0,
            step: 0.05,
            values: vec![c; 2001],
        };
        // int_k^{2k} c ds * k^{eps-1} = c k^eps
        let k = 10.0;
        let eps = 0.2;
        let v = band_statistic(&path_c, k, eps).unwrap();
        assert!((v - c * k.powf(eps)).abs() < 1e-10, "{v}");
    }

    #[test]
    fn band_statistic_rejects_bad_coverage() {
        let path = SampledPath {
            t0: 5.0,
            step: 0.05,
            values: vec![1.0; 100],
        };
        assert!(band_statistic(&path, 4.0, 0.1).is_err());
        let coarse = SampledPath {
            t0: 0.0,
            step: 0.2,
            values: vec![1.0; 200],
        };
        assert!(band_statistic(&coarse, 10.0, 0.1).is_err());
    }

    #[test]
    fn refinement_changes_smooth_band_statistic_little() {
        let mix = OuMixture::new(0.0, 0.9).unwrap();
        let fine = mix.sample_path(0.0, 0.025, 1601, 77, 0);
        let coarse = fine.subsample(2);
        let k = 12.0;
        let a = band_statistic(&fine, k, 0.2).unwrap();
        let b = band_statistic(&coarse, k, 0.2).unwrap();
        // Relative to the band-integral scale rather than a possibly tiny
        // centered value.
        let scale = fine
            .values
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
            * k.powf(0.2);
        assert!((a - b).abs() < 0.005 * scale, "{a} vs {b} (scale {scale})");
    }

    #[test]
    fn exceedance_is_nested_and_monotone() {
        let k_grid = vec![4.0, 8.0, 16.0, 32.0];
        let y = vec![
            vec![0.2, 1.5, 0.3, 0.1],
            vec![0.0, 0.4, 0.2, 0.0],
            vec![2.0, 0.1, 0.0, 1.2],
        ];
        let p4 = exceedance_probability(&y, &k_grid, 4.0);
        let p8 = exceedance_probability(&y, &k_grid, 8.0);
        let p32 = exceedance_probability(&y, &k_grid, 32.0);
        assert_eq!(p4, 2.0 / 3.0);
        assert_eq!(p8, 2.0 / 3.0);
        assert_eq!(p32, 1.0 / 3.0);
        assert!(p4 >= p8 && p8 >= p32);
        let zeros = vec![vec![0.0; 4]; 10];
        assert_eq!(exceedance_probability(&zeros, &k_grid, 4.0), 0.0);
    }

    #[test]
    fn larger_eps_scales_band_statistic_up_beyond_k1() {
        let mix = OuMixture::new(0.0, 0.9).unwrap();
        let path = mix.sample_path(0.0, 0.05, 801, 3, 0);
        let k = 10.0;
        let y1 = band_statistic(&path, k, 0.1).unwrap();
        let y2 = band_statistic(&path, k, 0.2).unwrap();
        // Y(eps2) = Y(eps1) * k^{eps2 - eps1} exactly.
        assert!((y2 - y1 * k.powf(0.1)).abs() < 1e-12 * y2.abs().max(1e-12));
        assert!(y2.abs() >= y1.abs());
    }

    #[test]
    fn ou_covariance_matches_design_at_lag_5() {
        let mix = OuMixture::new(0.0, 0.9).unwrap();
        let step = 0.05;
        let len = 601; // t in [0, 30]
        let n_paths = 600;
        let mut acc = Acc::new();
        let (j0, j5) = (100, 200); // t = 5 and t = 10: lag 5
        for i in 0..n_paths {
            let p = mix.sample_path(0.0, step, len, 2024, i);
            acc.push(p.values[j0] * p.values[j5]);
        }
        let designed = mix.designed_covariance(5.0, 10.0);
        assert!(
            (acc.mean() - designed).abs() < 3.0 * acc.se(),
            "emp {} vs designed {designed} (se {})",
            acc.mean(),
            acc.se()
        );
    }

    #[test]
    fn designed_covariance_respects_hypothesis_envelope() {
        let mix = OuMixture::new(0.1, 0.9).unwrap();
        for (s, t) in [(1.0, 1.0), (3.0, 10.0), (50.0, 51.0), (10.0, 500.0), (2.0, 2000.0)] {
            let cov = mix.designed_covariance(s, t).abs();
            let bound =
                (s.powf(mix.c1) + t.powf(mix.c1)) / (1.0 + (s - t).abs().powf(mix.c2));
            // Generic-constant envelope: the mixture stays within a modest
            // multiple of the hypothesis shape.
            assert!(cov <= 3.0 * bound, "cov {cov} vs bound {bound} at ({s},{t})");
        }
    }

    #[test]
    fn mixture_rejects_bad_exponents() {
        assert!(OuMixture::new(0.5, 0.9).is_err());
        assert!(OuMixture::new(0.0, 1.0).is_err());
        assert!(OuMixture::new(0.0, 0.9).is_ok());
    }

    #[test]
    fn band_statistic_record_validates_epsilon_range() {
        assert!(BandStatistic::new(8.0, 0.1, 0.5, AComponent::ReZ).is_ok());
        assert!(BandStatistic::new(8.0, 0.25, 0.5, AComponent::ReZ).is_err());
        assert!(BandStatistic::new(8.0, 0.0, 0.5, AComponent::ReZ).is_err());
        assert!(BandStatistic::new(8.0, 0.1, f64::NAN, AComponent::ReZ).is_err());
    }

    #[test]
    fn sampler_variants_produce_paths() {
        let synth = ProcessSampler::SyntheticOu {
            c1: 0.0,
            c2: 0.9,
            t0: 0.0,
            step: 0.05,
            len: 101,
            seed: 5,
            n_paths: 3,
        };
        let paths = synth.sample(&[]).unwrap();
        assert_eq!(paths.len(), 3);
        assert_eq!(paths[0].values.len(), 101);
    }
}
