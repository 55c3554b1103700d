//! Experiment configuration: UTF-8 JSON with defaults and cross-field
//! validation.
//!
//! Default table (any key may be omitted):
//!
//! | key                | default      | constraint                    |
//! |--------------------|--------------|-------------------------------|
//! | grid.n             | 64           | even, >= 16                   |
//! | grid.L             | 0.7          | > 0                           |
//! | field.m            | 3.0          | in (14/5, 4)                  |
//! | field.preset       | single_bump  |                               |
//! | field.amplitude    | 1.0          | > 0                           |
//! | field.radius       | 0.3          | support inside 0.9 L          |
//! | field.m1_bound     | 2*amplitude  | >= max h                      |
//! | field.m2_bound     | 1e6          | > 0 (H^r ball radius)         |
//! | band.K0            | 8.0          | 0 < K0 < K                    |
//! | band.K             | 32.0         |                               |
//! | band.nk            | 0 (derived)  | derived: tau.max/(4 tau.n)    |
//! | directions.n       | 16           | even, >= 6                    |
//! | solver.tol         | 1e-8         | > 0                           |
//! | solver.method      | born0        | born0 / born / krylov         |
//! | solver.born_terms  | 2            |                               |
//! | ensemble.R         | 50           | >= 1                          |
//! | seeds.base         | 1            |                               |
//! | stability.C        | 1.0          | > 0                           |
//! | stability.M0       | 10.0         | > 0                           |
//! | stability.alpha    | 0.1          | in (0, 1/4)                   |
//! | stability.beta1    | 1.0          | > 0                           |
//! | stability.beta2    | 0.25         | > 0                           |
//! | stability.overlay_c| 1.0          | > 0                           |
//! | tau.n              | 8            | >= 4                          |
//! | tau.max            | 0.45         | in (0, 1/2)                   |
//! | experiment.bands   | [8, 16, 32]  | ascending, positive           |
//! | experiment.delta   | 0.1          | >= 0 (h2 = (1 + delta) h1)    |

use crate::dataset::SweepMethod;
use crate::error::{Error, Result};
use crate::gridfield::{make_grid, strength_preset, GridSpec3, PresetId, StrengthField};
use serde::{Deserialize, Serialize};
use std::path::Path;

fn d_grid_n() -> usize { 64 }
fn d_grid_l() -> f64 { 0.7 }
fn d_m() -> f64 { 3.0 }
fn d_preset() -> PresetId { PresetId::SingleBump }
fn d_amplitude() -> f64 { 1.0 }
fn d_radius() -> f64 { 0.3 }
fn d_m2() -> f64 { 1e6 }
fn d_k0() -> f64 { 8.0 }
fn d_k() -> f64 { 32.0 }
fn d_dirs() -> usize { 16 }
fn d_tol() -> f64 { 1e-8 }
fn d_method() -> SweepMethod { SweepMethod::Born0 }
fn d_born_terms() -> usize { 2 }
fn d_r() -> usize { 50 }
fn d_seed() -> u64 { 1 }
fn d_c() -> f64 { 1.0 }
fn d_m0() -> f64 { 10.0 }
fn d_alpha() -> f64 { 0.1 }
fn d_beta1() -> f64 { 1.0 }
fn d_beta2() -> f64 { 0.25 }
fn d_overlay() -> f64 { 1.0 }
fn d_tau_n() -> usize { 8 }
fn d_tau_max() -> f64 { 0.45 }
fn d_bands() -> Vec<f64> { vec![8.0, 16.0, 32.0] }
fn d_delta() -> f64 { 0.1 }

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub grid: GridCfg,
    #[serde(default)]
    pub field: FieldCfg,
    #[serde(default)]
    pub band: BandCfg,
    #[serde(default)]
    pub directions: DirectionsCfg,
    #[serde(default)]
    pub solver: SolverCfg,
    #[serde(default)]
    pub ensemble: EnsembleCfg,
    #[serde(default)]
    pub seeds: SeedsCfg,
    #[serde(default)]
    pub stability: StabilityCfg,
    #[serde(default)]
    pub tau: TauCfg,
    #[serde(default)]
    pub experiment: ExperimentCfg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    #[serde(default = "d_grid_n")]
    pub n: usize,
    #[serde(default = "d_grid_l", rename = "L")]
    pub l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldCfg {
    #[serde(default = "d_m")]
    pub m: f64,
    #[serde(default = "d_preset")]
    pub preset: PresetId,
    #[serde(default = "d_amplitude")]
    pub amplitude: f64,
    #[serde(default = "d_radius")]
    pub radius: f64,
    /// Class bound M1 on sup h; defaults to the preset's own bound.
    #[serde(default)]
    pub m1_bound: Option<f64>,
    /// A-priori H^r ball radius M2 (recorded in manifests, not enforced
    /// beyond positivity).
    #[serde(default = "d_m2")]
    pub m2_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandCfg {
    #[serde(default = "d_k0", rename = "K0")]
    pub k0: f64,
    #[serde(default = "d_k", rename = "K")]
    pub k_upper: f64,
    /// Frequency samples for forward sweeps; 0 means derived from the lag
    /// grid (spacing tau_min / 4).
    #[serde(default)]
    pub nk: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionsCfg {
    #[serde(default = "d_dirs")]
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverCfg {
    #[serde(default = "d_tol")]
    pub tol: f64,
    #[serde(default = "d_method")]
    pub method: SweepMethod,
    #[serde(default = "d_born_terms")]
    pub born_terms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleCfg {
    #[serde(default = "d_r", rename = "R")]
    pub r: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedsCfg {
    #[serde(default = "d_seed")]
    pub base: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityCfg {
    #[serde(default = "d_c", rename = "C")]
    pub c: f64,
    #[serde(default = "d_m0", rename = "M0")]
    pub m0: f64,
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default = "d_beta1")]
    pub beta1: f64,
    #[serde(default = "d_beta2")]
    pub beta2: f64,
    /// Overlay constant standing in for the theorem's generic constant.
    #[serde(default = "d_overlay")]
    pub overlay_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauCfg {
    #[serde(default = "d_tau_n")]
    pub n: usize,
    #[serde(default = "d_tau_max")]
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentCfg {
    #[serde(default = "d_bands")]
    pub bands: Vec<f64>,
    /// Strength perturbation: h2 = (1 + delta) h1.
    #[serde(default = "d_delta")]
    pub delta: f64,
}

impl Default for GridCfg {
    fn default() -> Self { GridCfg { n: d_grid_n(), l: d_grid_l() } }
}
impl Default for FieldCfg {
    fn default() -> Self {
        FieldCfg {
            m: d_m(),
            preset: d_preset(),
            amplitude: d_amplitude(),
            radius: d_radius(),
            m1_bound: None,
            m2_bound: d_m2(),
        }
    }
}
impl Default for BandCfg {
    fn default() -> Self { BandCfg { k0: d_k0(), k_upper: d_k(), nk: 0 } }
}
impl Default for DirectionsCfg {
    fn default() -> Self { DirectionsCfg { n: d_dirs() } }
}
impl Default for SolverCfg {
    fn default() -> Self {
        SolverCfg { tol: d_tol(), method: d_method(), born_terms: d_born_terms() }
    }
}
impl Default for EnsembleCfg {
    fn default() -> Self { EnsembleCfg { r: d_r() } }
}
impl Default for SeedsCfg {
    fn default() -> Self { SeedsCfg { base: d_seed() } }
}
impl Default for StabilityCfg {
    fn default() -> Self {
        StabilityCfg {
            c: d_c(),
            m0: d_m0(),
            alpha: d_alpha(),
            beta1: d_beta1(),
            beta2: d_beta2(),
            overlay_c: d_overlay(),
        }
    }
}
impl Default for TauCfg {
    fn default() -> Self { TauCfg { n: d_tau_n(), max: d_tau_max() } }
}
impl Default for ExperimentCfg {
    fn default() -> Self { ExperimentCfg { bands: d_bands(), delta: d_delta() } }
}

impl ExperimentConfig {
    /// Cross-field validation; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        if self.grid.n % 2 != 0 || self.grid.n < 16 {
            return Err(Error::config("grid.n", "must be even and >= 16"));
        }
        if !(self.grid.l > 0.0) {
            return Err(Error::config("grid.L", "must be > 0"));
        }
        if !(self.field.m > 14.0 / 5.0 && self.field.m < 4.0) {
            return Err(Error::config(
                "field.m",
                format!("must lie in (14/5, 4), got {}", self.field.m),
            ));
        }
        if !(self.field.amplitude > 0.0) {
            return Err(Error::config("field.amplitude", "must be > 0"));
        }
        if !(self.field.radius > 0.0 && self.field.radius < 0.9 * self.grid.l) {
            return Err(Error::config("field.radius", "must lie in (0, 0.9 L)"));
        }
        if let Some(m1) = self.field.m1_bound {
            if !(m1 > 0.0) {
                return Err(Error::config("field.m1_bound", "must be > 0"));
            }
        }
        if !(self.field.m2_bound > 0.0) {
            return Err(Error::config("field.m2_bound", "must be > 0"));
        }
        if !(self.band.k0 > 0.0 && self.band.k0 < self.band.k_upper) {
            return Err(Error::config(
                "band.K0/band.K",
                format!("need 0 < K0 < K, got K0 = {}, K = {}", self.band.k0, self.band.k_upper),
            ));
        }
        if self.directions.n < 6 || self.directions.n % 2 != 0 {
            return Err(Error::config("directions.n", "must be even and >= 6"));
        }
        if !(self.solver.tol > 0.0) {
            return Err(Error::config("solver.tol", "must be > 0"));
        }
        if self.ensemble.r == 0 {
            return Err(Error::config("ensemble.R", "must be >= 1"));
        }
        if !(self.stability.alpha > 0.0 && self.stability.alpha < 0.25) {
            return Err(Error::config(
                "stability.alpha",
                format!("must lie in (0, 1/4), got {}", self.stability.alpha),
            ));
        }
        for (key, v) in [
            ("stability.C", self.stability.c),
            ("stability.M0", self.stability.m0),
            ("stability.beta1", self.stability.beta1),
            ("stability.beta2", self.stability.beta2),
            ("stability.overlay_c", self.stability.overlay_c),
        ] {
            if !(v > 0.0) {
                return Err(Error::config(key, "must be > 0"));
            }
        }
        if self.tau.n < 4 {
            return Err(Error::config("tau.n", "must be >= 4"));
        }
        if !(self.tau.max > 0.0 && self.tau.max < 0.5) {
            return Err(Error::config("tau.max", "must lie in (0, 1/2)"));
        }
        if self.experiment.bands.is_empty()
            || self.experiment.bands.windows(2).any(|w| !(w[1] > w[0]))
            || self.experiment.bands[0] <= 0.0
        {
            return Err(Error::config("experiment.bands", "must be ascending and positive"));
        }
        if !(self.experiment.delta >= 0.0) {
            return Err(Error::config("experiment.delta", "must be >= 0"));
        }
        Ok(())
    }

    pub fn make_grid(&self) -> Result<GridSpec3> {
        make_grid(self.grid.n, self.grid.l)
            .map_err(|e| Error::config("grid.n/grid.L", e.to_string()))
    }

    /// The configured base strength field h1.
    pub fn strength(&self) -> Result<StrengthField> {
        let grid = self.make_grid()?;
        let h = strength_preset(self.field.preset, grid, self.field.amplitude, self.field.radius)
            .map_err(|e| Error::config("field", e.to_string()))?;
        if let Some(m1) = self.field.m1_bound {
            let max = h.values().iter().cloned().fold(0.0, f64::max);
            if max > m1 {
                return Err(Error::config(
                    "field.m1_bound",
                    format!("preset max {max} exceeds declared bound {m1}"),
                ));
            }
        }
        Ok(h)
    }

    /// Lag grid: `tau.n` points in `(0, tau.max]`.
    pub fn tau_grid(&self) -> Vec<f64> {
        (0..self.tau.n)
            .map(|j| self.tau.max * (j + 1) as f64 / self.tau.n as f64)
            .collect()
    }

    /// Sweep frequency grid for the band `[k, 2k + tau.max]`: spacing at
    /// most `tau_min / 4` so lag interpolation error stays subdominant.
    pub fn sweep_k_grid(&self, band_k: f64) -> Vec<f64> {
        let hi = 2.0 * band_k + self.tau.max + 1e-9;
        let tau_min = self.tau.max / self.tau.n as f64;
        let nk = if self.band.nk > 0 {
            self.band.nk
        } else {
            ((hi - band_k) / (tau_min / 4.0)).ceil() as usize + 1
        };
        (0..nk)
            .map(|j| band_k + (hi - band_k) * j as f64 / (nk - 1) as f64)
            .collect()
    }
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config {
        key: "<json>".into(),
        detail: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}
