//! Far-field evaluation and backscatter sweeps.
//!
//! `u_inf(x_hat, theta, k) = (1/4pi) sum_y e^{-ik x_hat . y} V(y) u(y) dV`
//! with `u` the total field; splitting `u` by Born order gives
//! `u0 + u1 + u2plus` where `u0` depends on `x_hat - theta` only.

use super::resolvent::ResolventOperator;
use super::solver::{
    born_scattered_terms, default_l_trunc, incident_on_grid, neumann_norm_estimate,
    solve_with_operator,
};
use super::{FieldOnGrid, Frequency, IncidentWave, SolveReport};
use crate::dataset::{DatasetMeta, FarFieldDataset, SweepMethod, SweepSummary};
use crate::error::{Error, Result};
use crate::gridfield::PotentialRealization;
use num_complex::Complex64;
use rayon::prelude::*;

/// Incident plane wave as a grid field.
pub fn incident_field(v: &PotentialRealization, inc: &IncidentWave) -> FieldOnGrid {
    FieldOnGrid {
        grid: *v.grid(),
        values: incident_on_grid(v.grid(), inc),
    }
}

/// `u = u_inc + u_sc`.
pub fn total_field(u_inc: &FieldOnGrid, u_sc: &FieldOnGrid) -> FieldOnGrid {
    FieldOnGrid {
        grid: u_inc.grid,
        values: u_inc
            .values
            .iter()
            .zip(&u_sc.values)
            .map(|(a, b)| a + b)
            .collect(),
    }
}

/// Far-field quadrature against a weight field (restricted to supp V).
fn far_field_weighted(
    v: &PotentialRealization,
    weight: &[Complex64],
    x_hat: [f64; 3],
    k: Complex64,
) -> Complex64 {
    let grid = v.grid();
    let dv = grid.cell_volume();
    let ik = Complex64::new(0.0, -1.0) * k;
    let mut acc = Complex64::default();
    for (idx, y, vv) in v.support_entries() {
        let phase = (ik * (x_hat[0] * y[0] + x_hat[1] * y[1] + x_hat[2] * y[2])).exp();
        acc += phase * vv * weight[idx];
    }
    acc * dv / (4.0 * std::f64::consts::PI)
}

/// Far-field pattern from a converged total field at the same `k`.
pub fn far_field(
    v: &PotentialRealization,
    u_total: &FieldOnGrid,
    x_hat: [f64; 3],
    k: Complex64,
) -> Complex64 {
    far_field_weighted(v, &u_total.values, x_hat, k)
}

/// The Born split of the backscattered far field.
#[derive(Debug, Clone, Copy)]
pub struct BornFarTerms {
    pub u0: Complex64,
    pub u1: Complex64,
    pub u2plus: Complex64,
    pub report: SolveReport,
}

impl BornFarTerms {
    pub fn total(&self) -> Complex64 {
        self.u0 + self.u1 + self.u2plus
    }
}

/// Far-field Born terms at one `(x_hat, theta, k)`: `u0` from the incident
/// wave, `u1` from one resolvent application, and `u2plus` as the converged
/// far field minus both.
pub fn born_far_terms(
    v: &PotentialRealization,
    inc: &IncidentWave,
    x_hat: [f64; 3],
    tol: f64,
) -> Result<BornFarTerms> {
    let grid = *v.grid();
    let k = inc.frequency.complex();
    let op = ResolventOperator::new(grid, k, default_l_trunc(&grid))?;
    let est = neumann_norm_estimate(&op, v);
    if est >= 1.0 {
        return Err(Error::BornDivergent(est));
    }
    born_far_terms_with_operator(&op, v, inc, x_hat, tol, est)
}

/// Born-split far field with a prebuilt operator and cached norm
/// estimate; the per-frequency entry point for band sweeps.
pub fn born_far_terms_with_operator(
    op: &ResolventOperator,
    v: &PotentialRealization,
    inc: &IncidentWave,
    x_hat: [f64; 3],
    tol: f64,
    est: f64,
) -> Result<BornFarTerms> {
    let k = inc.frequency.complex();
    let u_inc = incident_on_grid(v.grid(), inc);
    let u0 = far_field_weighted(v, &u_inc, x_hat, k);
    // b = R0(V u_inc) is both the Krylov right-hand side and the first-order
    // inner field.
    let vu: Vec<Complex64> = v.values().iter().zip(&u_inc).map(|(p, u)| u * *p).collect();
    let b = op.apply(&vu);
    let u1 = far_field_weighted(v, &b, x_hat, k);
    let (u_sc, report) = solve_with_operator(op, v, inc, tol, est)?;
    let total: Vec<Complex64> = u_inc
        .iter()
        .zip(&u_sc.values)
        .map(|(a, c)| a + c)
        .collect();
    let far = far_field_weighted(v, &total, x_hat, k);
    Ok(BornFarTerms {
        u0,
        u1,
        u2plus: far - u0 - u1,
        report,
    })
}

/// Backscattered zeroth Born term over a frequency sweep for one direction:
/// `u0(-theta, theta, k) = (1/4pi) sum_y V(y) e^{2ik theta.y} dV`, with an
/// incremental phase recurrence over a uniform k-grid.
fn born0_row(
    support: &[(usize, [f64; 3], f64)],
    dv: f64,
    theta: [f64; 3],
    k_grid: &[f64],
) -> Vec<Complex64> {
    let nk = k_grid.len();
    let mut acc = vec![Complex64::default(); nk];
    if nk == 0 {
        return acc;
    }
    let uniform = nk < 2
        || k_grid
            .windows(2)
            .map(|w| w[1] - w[0])
            .all(|d| ((d - (k_grid[1] - k_grid[0])) / (k_grid[1] - k_grid[0])).abs() < 1e-12);
    for (_, y, vv) in support {
        let t = theta[0] * y[0] + theta[1] * y[1] + theta[2] * y[2];
        if uniform {
            let step = (Complex64::new(0.0, 2.0) * (k_grid.get(1).map_or(0.0, |k1| k1 - k_grid[0])) * t).exp();
            let mut phase = (Complex64::new(0.0, 2.0) * k_grid[0] * t).exp();
            for a in acc.iter_mut() {
                *a += phase * *vv;
                phase *= step;
            }
        } else {
            for (a, &k) in acc.iter_mut().zip(k_grid) {
                *a += (Complex64::new(0.0, 2.0) * k * t).exp() * *vv;
            }
        }
    }
    let scale = dv / (4.0 * std::f64::consts::PI);
    for a in acc.iter_mut() {
        *a *= scale;
    }
    acc
}

/// Dataset of backscattered far fields `u_inf(-theta, theta, k)` over all
/// (direction, frequency) pairs.
///
/// `Krylov` runs a full solve per pair; `Born { n_terms }` sums the
/// truncated series; `Born0` evaluates the zeroth term directly. Work is
/// parallel over frequencies (operators are per-k) with all reductions in
/// fixed order, so the dataset is identical for any thread count.
pub fn backscatter_sweep(
    v: &PotentialRealization,
    directions: &[[f64; 3]],
    k_grid: &[f64],
    tol: f64,
    method: SweepMethod,
    born_terms: usize,
) -> Result<FarFieldDataset> {
    if k_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Field("k grid must be strictly increasing".into()));
    }
    if k_grid.iter().any(|k| !(*k > 0.0)) {
        return Err(Error::Field("k grid must be positive".into()));
    }
    let grid = *v.grid();
    let n_dir = directions.len();
    let nk = k_grid.len();
    let mut values = vec![Complex64::default(); n_dir * nk];
    let mut summary = SweepSummary::default();

    match method {
        SweepMethod::Born0 => {
            let support = v.support_entries();
            let dv = grid.cell_volume();
            let rows: Vec<Vec<Complex64>> = directions
                .par_iter()
                .map(|theta| born0_row(&support, dv, *theta, k_grid))
                .collect();
            for (d, row) in rows.into_iter().enumerate() {
                for (j, val) in row.into_iter().enumerate() {
                    values[d * nk + j] = val;
                }
            }
        }
        SweepMethod::Krylov | SweepMethod::Born => {
            // One operator (and norm estimate) per frequency, shared by all
            // directions at that frequency.
            let per_k: Vec<Result<(Vec<Complex64>, SweepSummary)>> = k_grid
                .par_iter()
                .map(|&k| sweep_one_k(v, directions, k, tol, method, born_terms))
                .collect();
            for (j, res) in per_k.into_iter().enumerate() {
                let (col, s) = res?;
                summary.max_iterations = summary.max_iterations.max(s.max_iterations);
                summary.max_relative_residual =
                    summary.max_relative_residual.max(s.max_relative_residual);
                summary.max_norm_estimate = summary.max_norm_estimate.max(s.max_norm_estimate);
                for (d, val) in col.into_iter().enumerate() {
                    values[d * nk + j] = val;
                }
            }
        }
    }

    let ds = FarFieldDataset {
        directions: directions.to_vec(),
        frequencies: k_grid.to_vec(),
        values,
        meta: DatasetMeta {
            m: v.order(),
            grid_n: grid.n(),
            grid_l: grid.l_box(),
            seed: v.seed(),
            method,
            tol,
            summary,
        },
    };
    ds.validate()?;
    Ok(ds)
}

fn sweep_one_k(
    v: &PotentialRealization,
    directions: &[[f64; 3]],
    k: f64,
    tol: f64,
    method: SweepMethod,
    born_terms: usize,
) -> Result<(Vec<Complex64>, SweepSummary)> {
    let grid = *v.grid();
    let kc = Complex64::new(k, 0.0);
    let op = ResolventOperator::new(grid, kc, default_l_trunc(&grid))?;
    let est = neumann_norm_estimate(&op, v);
    let mut col = Vec::with_capacity(directions.len());
    let mut summary = SweepSummary {
        max_norm_estimate: est,
        ..SweepSummary::default()
    };
    for theta in directions {
        let inc = IncidentWave::new(*theta, Frequency::real(k)?)?;
        let x_hat = [-theta[0], -theta[1], -theta[2]];
        let value = match method {
            SweepMethod::Krylov => {
                let (u_sc, rep) = solve_with_operator(&op, v, &inc, tol, est)?;
                summary.max_iterations = summary.max_iterations.max(rep.iterations);
                summary.max_relative_residual =
                    summary.max_relative_residual.max(rep.relative_residual);
                let u_inc = incident_field(v, &inc);
                far_field(v, &total_field(&u_inc, &u_sc), x_hat, kc)
            }
            SweepMethod::Born => {
                if est >= 1.0 {
                    return Err(Error::NonConvergence(
                        theta[0],
                        theta[1],
                        theta[2],
                        format!("{k}"),
                        format!("born series divergent: norm estimate {est} >= 1"),
                    ));
                }
                summary.max_iterations = summary.max_iterations.max(born_terms);
                let terms = born_scattered_terms(v, &inc, born_terms)?;
                let u_inc = incident_field(v, &inc);
                let mut u_sc = FieldOnGrid::zeros(grid);
                for t in terms {
                    for (o, tv) in u_sc.values.iter_mut().zip(t.values) {
                        *o += tv;
                    }
                }
                far_field(v, &total_field(&u_inc, &u_sc), x_hat, kc)
            }
            SweepMethod::Born0 => unreachable!(),
        };
        col.push(value);
    }
    Ok((col, summary))
}
