//! Direct scattering: free-resolvent convolution, Lippmann-Schwinger and
//! Born solves, and far-field evaluation.
//!
//! Conventions. The scattered field solves `u_sc = R0(k)(V (u_inc + u_sc))`
//! with `R0(k) = (-Delta - k^2)^{-1}` carried by the outgoing kernel
//! `e^{ik|x-y|} / (4 pi |x-y|)`; the Born expansion is
//! `u_sc = R0 sum_j (V R0)^j (V u_inc)`. Discretization is midpoint
//! collocation with the radially truncated kernel applied as an exact padded
//! cyclic convolution, so the discrete resolvent equals the direct kernel
//! sum up to roundoff.

mod farfield;
mod kernel;
mod resolvent;
mod solver;

pub use farfield::{
    backscatter_sweep, born_far_terms, born_far_terms_with_operator, far_field, incident_field,
    total_field, BornFarTerms,
};
pub use kernel::{truncated_green_symbol, truncated_symbol_value};
pub use resolvent::{apply_free_resolvent, ResolventOperator};
pub use solver::{
    born_scattered_terms, born_solve, gmres, neumann_norm_estimate, solve_lippmann_schwinger,
    solve_with_operator, GmresOutcome, SolveMethod, SolveReport,
};

use crate::error::{Error, Result};
use crate::gridfield::GridSpec3;
use num_complex::Complex64;

/// Wavenumber; physical runs use real `k > 0`, diagnostics may probe
/// complex `k` with `|k| > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency(Complex64);

impl Frequency {
    pub fn new(k: Complex64) -> Result<Self> {
        if !(k.norm() > 0.0) || !k.re.is_finite() || !k.im.is_finite() {
            return Err(Error::Field(format!("frequency must satisfy |k| > 0, got {k}")));
        }
        Ok(Frequency(k))
    }

    pub fn real(k: f64) -> Result<Self> {
        Self::new(Complex64::new(k, 0.0))
    }

    pub fn complex(&self) -> Complex64 {
        self.0
    }
}

/// Incident plane wave `e^{i k theta . x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentWave {
    pub direction: [f64; 3],
    pub frequency: Frequency,
}

impl IncidentWave {
    pub fn new(direction: [f64; 3], frequency: Frequency) -> Result<Self> {
        if (crate::sphere::norm(direction) - 1.0).abs() > 1e-12 {
            return Err(Error::Field(format!(
                "incident direction must be unit length, got |theta| = {}",
                crate::sphere::norm(direction)
            )));
        }
        Ok(IncidentWave { direction, frequency })
    }
}

/// A complex field sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldOnGrid {
    pub grid: GridSpec3,
    pub values: Vec<Complex64>,
}

impl FieldOnGrid {
    pub fn zeros(grid: GridSpec3) -> Self {
        FieldOnGrid {
            values: vec![Complex64::default(); grid.node_count()],
            grid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.grid.node_count() {
            return Err(Error::Mismatch("field length does not match the grid".into()));
        }
        if self
            .values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Mismatch("non-finite field entry".into()));
        }
        Ok(())
    }

    /// Discrete L^2 norm with the cell-volume weight.
    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }
}
