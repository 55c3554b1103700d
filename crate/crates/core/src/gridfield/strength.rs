//! Micro-correlation strength fields: smooth compactly supported presets.

use super::grid::GridSpec3;
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetId {
    SingleBump,
    TwoBumps,
    Annulus,
}

/// Closed-form description of a preset; enough to evaluate `h` and its
/// Fourier transform off the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PresetDescriptor {
    pub id: PresetId,
    pub amplitude: f64,
    pub radius: f64,
}

/// Nonnegative smooth strength field sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthField {
    grid: GridSpec3,
    values: Vec<f64>,
    preset: Option<PresetDescriptor>,
    sup_bound: f64,
    support_radius: f64,
}

/// The standard mollifier profile `exp(-1/(1-t^2))` on |t| < 1, 0 outside.
fn bump(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

/// Two-bump centers sit at `+-0.8 * radius` along the first axis, so the
/// midpoint is interior to both bumps and the support extent is
/// `1.8 * radius`.
const TWO_BUMP_OFFSET: f64 = 0.8;
/// Annulus shell: centered at `0.7 * radius` with half-width `0.3 * radius`.
const ANNULUS_CENTER: f64 = 0.7;
const ANNULUS_WIDTH: f64 = 0.3;

/// Closed-form preset value at an arbitrary point.
pub fn preset_value(desc: &PresetDescriptor, x: [f64; 3]) -> f64 {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    match desc.id {
        PresetId::SingleBump => desc.amplitude * bump(r / desc.radius),
        PresetId::TwoBumps => {
            let c = TWO_BUMP_OFFSET * desc.radius;
            let d1 = ((x[0] - c) * (x[0] - c) + x[1] * x[1] + x[2] * x[2]).sqrt();
            let d2 = ((x[0] + c) * (x[0] + c) + x[1] * x[1] + x[2] * x[2]).sqrt();
            desc.amplitude * (bump(d1 / desc.radius) + bump(d2 / desc.radius))
        }
        PresetId::Annulus => {
            let t = (r - ANNULUS_CENTER * desc.radius) / (ANNULUS_WIDTH * desc.radius);
            desc.amplitude * bump(t)
        }
    }
}

fn support_extent(desc: &PresetDescriptor) -> f64 {
    match desc.id {
        PresetId::SingleBump => desc.radius,
        PresetId::TwoBumps => (TWO_BUMP_OFFSET + 1.0) * desc.radius,
        PresetId::Annulus => desc.radius,
    }
}

pub fn strength_preset(
    id: PresetId,
    grid: GridSpec3,
    amplitude: f64,
    radius: f64,
) -> Result<StrengthField> {
    if !(amplitude > 0.0) {
        return Err(Error::Field(format!("amplitude must be > 0, got {amplitude}")));
    }
    if !(radius > 0.0) || radius >= 0.9 * grid.l_box() {
        return Err(Error::Field(format!(
            "radius {radius} must lie in (0, 0.9 * L) with L = {}",
            grid.l_box()
        )));
    }
    let desc = PresetDescriptor { id, amplitude, radius };
    let extent = support_extent(&desc);
    if extent >= 0.9 * grid.l_box() {
        return Err(Error::Field(format!(
            "support extent {extent} reaches 0.9 * L = {}; shrink the radius",
            0.9 * grid.l_box()
        )));
    }
    let mut values = vec![0.0; grid.node_count()];
    for (idx, v) in values.iter_mut().enumerate() {
        *v = preset_value(&desc, grid.node_coords(idx));
    }
    Ok(StrengthField {
        grid,
        values,
        preset: Some(desc),
        // Class-V a-priori bound: the mollifier max is e^{-1} * amplitude
        // (twice that for overlapping bumps), so the amplitude-scaled bound
        // below is always valid.
        sup_bound: 2.0 * amplitude,
        support_radius: extent,
    })
}

impl StrengthField {
    /// Build from explicit samples; used for degenerate fields in tests and
    /// for deserialized containers.
    pub fn from_values(
        grid: GridSpec3,
        values: Vec<f64>,
        preset: Option<PresetDescriptor>,
        sup_bound: f64,
        support_radius: f64,
    ) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::Field("value array does not match the grid".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Field("strength values must be finite and >= 0".into()));
        }
        let max = values.iter().cloned().fold(0.0, f64::max);
        if max > sup_bound * (1.0 + 1e-12) {
            return Err(Error::Field(format!(
                "max value {max} exceeds declared sup bound {sup_bound}"
            )));
        }
        if support_radius >= 0.9 * grid.l_box() {
            return Err(Error::Field("support must stay inside 0.9 * L".into()));
        }
        Ok(StrengthField {
            grid,
            values,
            preset,
            sup_bound,
            support_radius,
        })
    }

    pub fn zero(grid: GridSpec3) -> Self {
        StrengthField {
            values: vec![0.0; grid.node_count()],
            grid,
            preset: None,
            sup_bound: 0.0,
            support_radius: 0.0,
        }
    }

    /// Same shape scaled by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        StrengthField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
            preset: self.preset.map(|d| PresetDescriptor {
                amplitude: d.amplitude * factor,
                ..d
            }),
            sup_bound: self.sup_bound * factor,
            support_radius: self.support_radius,
        }
    }

    pub fn grid(&self) -> &GridSpec3 {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn preset(&self) -> Option<&PresetDescriptor> {
        self.preset.as_ref()
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// Max |x| over the declared support.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn value_at_node(&self, node: [usize; 3]) -> f64 {
        self.values[self.grid.idx(node[0], node[1], node[2])]
    }

    /// Metadata equality for ensemble consistency checks: grid and shape,
    /// not the seed-dependent parts.
    pub fn same_shape(&self, other: &Self) -> bool {
        self.grid == other.grid
            && self.preset == other.preset
            && self.sup_bound == other.sup_bound
            && (self.preset.is_some() || self.values == other.values)
    }
}

/// Continuous Fourier transform of a preset, `hhat(xi) = int h(x) e^{-i xi.x} dx`,
/// by adaptive radial quadrature. All presets are symmetric under `x -> -x`,
/// so the transform is real and even.
pub fn exact_hhat(desc: &PresetDescriptor, xi: [f64; 3]) -> Complex64 {
    let q = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
    let sinc = |x: f64| if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    let radial = |profile: &dyn Fn(f64) -> f64, lo: f64, hi: f64| -> f64 {
        4.0 * std::f64::consts::PI
            * adaptive_simpson(&|s| profile(s) * s * s * sinc(s * q), lo, hi, 1e-10)
    };
    let value = match desc.id {
        PresetId::SingleBump => radial(
            &|s| desc.amplitude * bump(s / desc.radius),
            0.0,
            desc.radius,
        ),
        PresetId::TwoBumps => {
            let single = radial(
                &|s| desc.amplitude * bump(s / desc.radius),
                0.0,
                desc.radius,
            );
            2.0 * (TWO_BUMP_OFFSET * desc.radius * xi[0]).cos() * single
        }
        PresetId::Annulus => radial(
            &|s| {
                let t = (s - ANNULUS_CENTER * desc.radius) / (ANNULUS_WIDTH * desc.radius);
                desc.amplitude * bump(t)
            },
            (ANNULUS_CENTER - ANNULUS_WIDTH) * desc.radius,
            desc.radius,
        ),
    };
    Complex64::new(value, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridfield::make_grid;

    #[test]
    fn single_bump_center_value() {
        let desc = PresetDescriptor {
            id: PresetId::SingleBump,
            amplitude: 1.0,
            radius: 0.5,
        };
        let v = preset_value(&desc, [0.0, 0.0, 0.0]);
        assert!((v - (-1.0f64).exp()).abs() < 1e-15, "{v}");
    }

    #[test]
    fn single_bump_vanishes_outside_radius() {
        let desc = PresetDescriptor {
            id: PresetId::SingleBump,
            amplitude: 3.0,
            radius: 0.5,
        };
        assert_eq!(preset_value(&desc, [0.5, 0.0, 0.0]), 0.0);
        assert_eq!(preset_value(&desc, [0.4, 0.4, 0.0]), 0.0);
    }

    #[test]
    fn two_bumps_midpoint_is_sum_of_tails() {
        // Centers at +-0.4 e1 for radius 0.5; the origin sees two equal
        // tails bump(0.8) = exp(-1/(1 - 0.64)).
        let desc = PresetDescriptor {
            id: PresetId::TwoBumps,
            amplitude: 1.0,
            radius: 0.5,
        };
        let v = preset_value(&desc, [0.0, 0.0, 0.0]);
        let tail = (-1.0 / (1.0 - 0.64f64)).exp();
        assert!((v - 2.0 * tail).abs() < 1e-15, "{v} vs {}", 2.0 * tail);
    }

    #[test]
    fn preset_rejects_oversized_radius() {
        let g = make_grid(16, 1.0).unwrap();
        assert!(strength_preset(PresetId::SingleBump, g, 1.0, 0.95).is_err());
        // Two-bump extent 1.8 r must also stay inside 0.9 L.
        assert!(strength_preset(PresetId::TwoBumps, g, 1.0, 0.6).is_err());
        assert!(strength_preset(PresetId::TwoBumps, g, 1.0, 0.45).is_ok());
    }

    #[test]
    fn sampled_values_are_nonnegative_and_bounded() {
        let g = make_grid(16, 1.0).unwrap();
        let h = strength_preset(PresetId::Annulus, g, 2.0, 0.6).unwrap();
        assert!(h.values().iter().all(|v| *v >= 0.0));
        let max = h.values().iter().cloned().fold(0.0, f64::max);
        assert!(max <= h.sup_bound());
        assert!(max > 0.0);
    }

    #[test]
    fn hhat_at_zero_matches_mass() {
        let g = make_grid(32, 1.0).unwrap();
        let h = strength_preset(PresetId::SingleBump, g, 1.0, 0.5).unwrap();
        let desc = *h.preset().unwrap();
        let mass_quad = exact_hhat(&desc, [0.0, 0.0, 0.0]).re;
        // Riemann sum of the sampled field approaches the same mass.
        let mass_grid: f64 = h.values().iter().sum::<f64>() * g.cell_volume();
        assert!(
            (mass_quad - mass_grid).abs() < 3e-3 * mass_quad,
            "quad {mass_quad} grid {mass_grid}"
        );
    }
}
