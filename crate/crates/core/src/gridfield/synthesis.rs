//! Fractional spectral filtering and potential synthesis.

use super::grid::GridSpec3;
use super::strength::StrengthField;
use crate::error::{Error, Result};
use crate::fft::{fft3, ifft3};
use num_complex::Complex64;

/// Applies a real, even multiplier `symbol(|xi|)` on the lattice frequency
/// grid: inverse DFT of `symbol * DFT(noise)` with the zero mode forced to
/// zero. The input is real and the symbol even, so the output is real up to
/// roundoff; the real part is returned.
pub fn apply_symbol_filter<F: Fn(f64) -> f64>(
    noise: &[f64],
    grid: &GridSpec3,
    symbol: F,
) -> Vec<f64> {
    let n = grid.n();
    assert_eq!(noise.len(), grid.node_count());
    let mut data: Vec<Complex64> = noise.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    fft3(&mut data, n);
    for jx in 0..n {
        for jy in 0..n {
            for jz in 0..n {
                let idx = grid.idx(jx, jy, jz);
                if jx == 0 && jy == 0 && jz == 0 {
                    data[idx] = Complex64::default();
                } else {
                    data[idx] *= symbol(grid.freq_norm_sq(jx, jy, jz).sqrt());
                }
            }
        }
    }
    ifft3(&mut data, n);
    data.iter().map(|v| v.re).collect()
}

/// Half-order fractional filter `|xi|^{-m/2}`, realizing the covariance
/// symbol `|xi|^{-m}` of the synthesized field. The DC mode is removed.
pub fn apply_spectral_filter(noise: &[f64], grid: &GridSpec3, m: f64) -> Result<Vec<f64>> {
    if !(m > 2.0 && m < 4.0) {
        return Err(Error::Field(format!("filter order m = {m} outside (2, 4)")));
    }
    Ok(apply_symbol_filter(noise, grid, |q| q.powf(-m / 2.0)))
}

/// One realization of the random potential `V = sqrt(h) * filtered noise`,
/// regenerable bit-identically from `(seed, m, strength, grid)`.
#[derive(Debug, Clone)]
pub struct PotentialRealization {
    grid: GridSpec3,
    m: f64,
    seed: u64,
    values: Vec<f64>,
    strength: StrengthField,
}

pub fn synthesize_potential(
    strength: &StrengthField,
    m: f64,
    seed: u64,
) -> Result<PotentialRealization> {
    if !(m > 14.0 / 5.0 && m < 4.0) {
        return Err(Error::Field(format!("order m = {m} outside (14/5, 4)")));
    }
    let grid = *strength.grid();
    let noise = super::noise::sample_white_noise(&grid, seed);
    let filtered = apply_spectral_filter(&noise, &grid, m)?;
    let values: Vec<f64> = strength
        .values()
        .iter()
        .zip(filtered.iter())
        .map(|(h, g)| h.sqrt() * g)
        .collect();
    Ok(PotentialRealization {
        grid,
        m,
        seed,
        values,
        strength: strength.clone(),
    })
}

impl PotentialRealization {
    /// Wrap explicit samples (deterministic test potentials, deserialized
    /// containers). `values` must vanish wherever the strength does.
    pub fn from_values(
        strength: StrengthField,
        m: f64,
        seed: u64,
        values: Vec<f64>,
    ) -> Result<Self> {
        let grid = *strength.grid();
        if values.len() != grid.node_count() {
            return Err(Error::Field("potential array does not match the grid".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Field("potential values must be finite".into()));
        }
        if values
            .iter()
            .zip(strength.values())
            .any(|(v, h)| *h == 0.0 && *v != 0.0)
        {
            return Err(Error::Field("potential support exceeds the strength support".into()));
        }
        Ok(PotentialRealization {
            grid,
            m,
            seed,
            values,
            strength,
        })
    }

    pub fn grid(&self) -> &GridSpec3 {
        &self.grid
    }

    pub fn order(&self) -> f64 {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn strength(&self) -> &StrengthField {
        &self.strength
    }

    /// (node index, coordinates, V value) over the strength support, in
    /// ascending node order. Far-field sums iterate this list.
    pub fn support_entries(&self) -> Vec<(usize, [f64; 3], f64)> {
        self.strength
            .values()
            .iter()
            .enumerate()
            .filter(|(_, h)| **h > 0.0)
            .map(|(idx, _)| (idx, self.grid.node_coords(idx), self.values[idx]))
            .collect()
    }

    pub fn same_ensemble(&self, other: &Self) -> bool {
        self.grid == other.grid && self.m == other.m && self.strength.same_shape(&other.strength)
    }
}
