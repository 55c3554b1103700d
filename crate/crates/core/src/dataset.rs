//! Backscattered far-field datasets shared by the forward sweep, the
//! inverse estimators, and the ergodic harness.

use crate::error::{Error, Result};
use crate::sphere;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// How the far-field values of a dataset were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMethod {
    /// Full Lippmann-Schwinger solve per (direction, frequency).
    Krylov,
    /// Truncated Born series.
    Born,
    /// Zeroth Born term only (direct Fourier sum of the potential).
    Born0,
}

/// Aggregate solver diagnostics over a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct SweepSummary {
    pub max_iterations: usize,
    pub max_relative_residual: f64,
    pub max_norm_estimate: f64,
}

/// Dataset metadata: enough to re-derive the generating run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub m: f64,
    pub grid_n: usize,
    pub grid_l: f64,
    pub seed: u64,
    pub method: SweepMethod,
    pub tol: f64,
    pub summary: SweepSummary,
}

/// Complex backscattered amplitudes `u_inf(-theta, theta, k)` indexed by
/// (direction, frequency). Directions are stored antipodally paired (see
/// [`crate::sphere::antipodal_directions`]); frequencies are strictly
/// increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldDataset {
    pub directions: Vec<[f64; 3]>,
    pub frequencies: Vec<f64>,
    /// Direction-major: `values[dir * n_freq + freq]`.
    pub values: Vec<Complex64>,
    pub meta: DatasetMeta,
}

impl FarFieldDataset {
    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.directions.len() * self.frequencies.len() {
            return Err(Error::Mismatch("values shape != directions x frequencies".into()));
        }
        if self
            .frequencies
            .windows(2)
            .any(|w| !(w[1] > w[0]))
        {
            return Err(Error::Mismatch("frequencies must be strictly increasing".into()));
        }
        if self.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Mismatch("non-finite far-field value".into()));
        }
        for d in &self.directions {
            if (sphere::norm(*d) - 1.0).abs() > 1e-9 {
                return Err(Error::Mismatch("direction is not a unit vector".into()));
            }
        }
        Ok(())
    }

    pub fn n_dir(&self) -> usize {
        self.directions.len()
    }

    pub fn n_freq(&self) -> usize {
        self.frequencies.len()
    }

    #[inline]
    pub fn value(&self, dir: usize, freq: usize) -> Complex64 {
        self.values[dir * self.frequencies.len() + freq]
    }

    /// Row of values for one direction.
    pub fn row(&self, dir: usize) -> &[Complex64] {
        let nf = self.frequencies.len();
        &self.values[dir * nf..(dir + 1) * nf]
    }

    /// Linear interpolation of `u_inf(-theta_dir, theta_dir, s)` on the
    /// frequency grid. `s` must be inside the covered range.
    pub fn interpolate(&self, dir: usize, s: f64) -> Result<Complex64> {
        let f = &self.frequencies;
        if s < f[0] - 1e-12 || s > f[f.len() - 1] + 1e-12 {
            return Err(Error::Coverage(format!(
                "frequency {s} outside dataset range [{}, {}]",
                f[0],
                f[f.len() - 1]
            )));
        }
        let s = s.clamp(f[0], f[f.len() - 1]);
        let j = match f.binary_search_by(|v| v.total_cmp(&s)) {
            Ok(j) => return Ok(self.value(dir, j)),
            Err(j) => j.clamp(1, f.len() - 1),
        };
        let (a, b) = (f[j - 1], f[j]);
        let t = (s - a) / (b - a);
        Ok(self.value(dir, j - 1) * (1.0 - t) + self.value(dir, j) * t)
    }

    /// Datasets are comparable when directions and frequencies agree.
    pub fn same_grids(&self, other: &Self) -> bool {
        self.directions == other.directions && self.frequencies == other.frequencies
    }
}
