//! Lippmann-Schwinger solves: restarted GMRES on the fixed-point system and
//! the truncated Born series, plus the power-iteration regime gate.

use super::resolvent::ResolventOperator;
use super::{FieldOnGrid, IncidentWave};
use crate::error::{Error, Result};
use crate::gridfield::PotentialRealization;
use crate::rng::CounterRng;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const GMRES_RESTART: usize = 50;
pub const GMRES_MAX_ITERS: usize = 2000;
const POWER_ITERS: usize = 20;
const POWER_SEED: u64 = 0x5ca7_7e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Krylov,
    Born,
}

/// Per-solve diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: SolveMethod,
    /// Krylov iterations or Born terms.
    pub iterations: usize,
    pub relative_residual: f64,
    /// Power-iteration estimate of the spectral scale of `R0(k) V`; the
    /// Born/uniqueness regime gate, not a certified bound.
    pub neumann_norm_estimate: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub struct GmresOutcome {
    pub solution: Vec<Complex64>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Restarted GMRES for `A x = b` with a matrix-free operator. The residual
/// is tracked in the plain l2 norm, which equals the cell-volume-weighted
/// norm up to a constant factor on a uniform grid.
pub fn gmres<F>(apply: F, b: &[Complex64], tol: f64, restart: usize, max_iters: usize) -> GmresOutcome
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let n = b.len();
    let b_norm = norm(b);
    let mut x = vec![Complex64::default(); n];
    if b_norm == 0.0 {
        return GmresOutcome {
            solution: x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let mut total_iters = 0usize;
    let mut rel_res;
    loop {
        // r = b - A x
        let mut r: Vec<Complex64> = if total_iters == 0 {
            b.to_vec()
        } else {
            let ax = apply(&x);
            b.iter().zip(ax).map(|(bi, ai)| bi - ai).collect()
        };
        let beta = norm(&r);
        rel_res = beta / b_norm;
        if rel_res <= tol || total_iters >= max_iters {
            return GmresOutcome {
                solution: x,
                iterations: total_iters,
                relative_residual: rel_res,
                converged: rel_res <= tol,
            };
        }
        for v in r.iter_mut() {
            *v /= beta;
        }
        let mut basis: Vec<Vec<Complex64>> = vec![r];
        // Hessenberg columns after Givens rotations, plus rotation pairs.
        let mut h_cols: Vec<Vec<Complex64>> = Vec::new();
        let mut cs: Vec<Complex64> = Vec::new();
        let mut sn: Vec<Complex64> = Vec::new();
        let mut g = vec![Complex64::default(); restart + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut inner = 0usize;

        while inner < restart && total_iters < max_iters {
            let mut w = apply(&basis[inner]);
            let mut h = vec![Complex64::default(); inner + 2];
            // Modified Gram-Schmidt.
            for (i, vi) in basis.iter().enumerate() {
                let hij = dot(vi, &w);
                h[i] = hij;
                for (wv, vv) in w.iter_mut().zip(vi) {
                    *wv -= hij * vv;
                }
            }
            let wn = norm(&w);
            h[inner + 1] = Complex64::new(wn, 0.0);
            // Apply accumulated rotations to the new column.
            for i in 0..inner {
                let tmp = cs[i] * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i].conj() * h[i] + cs[i].conj() * h[i + 1];
                h[i] = tmp;
            }
            // New rotation zeroing the subdiagonal.
            let denom = (h[inner].norm_sqr() + h[inner + 1].norm_sqr()).sqrt();
            let (c, s) = if denom == 0.0 {
                (Complex64::new(1.0, 0.0), Complex64::default())
            } else {
                (h[inner].conj() / denom, h[inner + 1].conj() / denom)
            };
            h[inner] = Complex64::new(denom, 0.0);
            h[inner + 1] = Complex64::default();
            let g_new = -s.conj() * g[inner];
            g[inner] = c * g[inner] + s * g[inner + 1];
            g[inner + 1] = g_new;
            cs.push(c);
            sn.push(s);
            h_cols.push(h);
            total_iters += 1;
            inner += 1;
            rel_res = g[inner].norm() / b_norm;
            let breakdown = wn < 1e-300;
            if rel_res <= tol || inner == restart || total_iters >= max_iters || breakdown {
                // Back-substitute the triangular system and update x.
                let mut y = vec![Complex64::default(); inner];
                for i in (0..inner).rev() {
                    let mut acc = g[i];
                    for j in i + 1..inner {
                        acc -= h_cols[j][i] * y[j];
                    }
                    y[i] = acc / h_cols[i][i];
                }
                for (i, yi) in y.iter().enumerate() {
                    for (xv, bv) in x.iter_mut().zip(&basis[i]) {
                        *xv += yi * bv;
                    }
                }
                if rel_res <= tol || breakdown {
                    // Recompute the true residual for the report.
                    let ax = apply(&x);
                    let true_res: f64 = b
                        .iter()
                        .zip(ax)
                        .map(|(bi, ai)| (bi - ai).norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                    rel_res = true_res / b_norm;
                    if rel_res <= tol {
                        return GmresOutcome {
                            solution: x,
                            iterations: total_iters,
                            relative_residual: rel_res,
                            converged: true,
                        };
                    }
                }
                break;
            }
            if wn < 1e-300 {
                break;
            }
            for v in w.iter_mut() {
                *v /= wn;
            }
            basis.push(w);
        }
    }
}

/// Multiply by the potential pointwise.
fn apply_potential(v: &PotentialRealization, u: &[Complex64]) -> Vec<Complex64> {
    v.values().iter().zip(u).map(|(p, x)| x * *p).collect()
}

/// Power-iteration estimate of the spectral scale of `T = R0(k) V` on the
/// grid: 20 iterations from a fixed seeded start, geometric mean of the
/// last growth ratios. Used only as a regime gate.
pub fn neumann_norm_estimate(op: &ResolventOperator, v: &PotentialRealization) -> f64 {
    let count = op.grid().node_count();
    let mut rng = CounterRng::new(POWER_SEED, 0);
    let mut x: Vec<Complex64> = (0..count)
        .map(|_| {
            let (a, b) = rng.normal_pair();
            Complex64::new(a, b)
        })
        .collect();
    let mut nx = norm(&x);
    if nx == 0.0 {
        return 0.0;
    }
    for v0 in x.iter_mut() {
        *v0 /= nx;
    }
    let mut ratios = Vec::with_capacity(POWER_ITERS);
    for _ in 0..POWER_ITERS {
        let mut y = op.apply(&apply_potential(v, &x));
        nx = norm(&y);
        if nx == 0.0 || !nx.is_finite() {
            return if nx == 0.0 { 0.0 } else { f64::INFINITY };
        }
        ratios.push(nx);
        for yv in y.iter_mut() {
            *yv /= nx;
        }
        x = y;
    }
    // Geometric mean of the last five ratios damps complex-pair beating.
    let tail = &ratios[ratios.len() - 5..];
    (tail.iter().map(|r| r.ln()).sum::<f64>() / tail.len() as f64).exp()
}

/// Incident plane wave sampled on the grid.
pub(crate) fn incident_on_grid(grid: &crate::gridfield::GridSpec3, inc: &IncidentWave) -> Vec<Complex64> {
    let k = inc.frequency.complex();
    let d = inc.direction;
    (0..grid.node_count())
        .map(|i| {
            let x = grid.node_coords(i);
            (Complex64::new(0.0, 1.0) * k * (d[0] * x[0] + d[1] * x[1] + d[2] * x[2])).exp()
        })
        .collect()
}

/// Default truncation radius: the full padded-periodization margin, which
/// always covers the support diameter (supports stay inside 0.9 L).
pub(crate) fn default_l_trunc(grid: &crate::gridfield::GridSpec3) -> f64 {
    2.0 * grid.l_box()
}

/// Krylov solve of `u_sc = R0(k)(V(u_inc + u_sc))` with a prebuilt operator
/// and a cached norm estimate (the estimate is direction-independent).
pub fn solve_with_operator(
    op: &ResolventOperator,
    v: &PotentialRealization,
    inc: &IncidentWave,
    tol: f64,
    norm_estimate: f64,
) -> Result<(FieldOnGrid, SolveReport)> {
    let grid = *v.grid();
    let u_inc = incident_on_grid(&grid, inc);
    let b = op.apply(&apply_potential(v, &u_inc));
    let apply = |u: &[Complex64]| -> Vec<Complex64> {
        let t = op.apply(&apply_potential(v, u));
        u.iter().zip(t).map(|(ui, ti)| ui - ti).collect()
    };
    let out = gmres(apply, &b, tol, GMRES_RESTART, GMRES_MAX_ITERS);
    if !out.converged {
        let k = inc.frequency.complex();
        return Err(Error::NonConvergence(
            inc.direction[0],
            inc.direction[1],
            inc.direction[2],
            format!("{k}"),
            format!(
                "relative residual {} after {} iterations (tol {tol})",
                out.relative_residual, out.iterations
            ),
        ));
    }
    Ok((
        FieldOnGrid {
            grid,
            values: out.solution,
        },
        SolveReport {
            method: SolveMethod::Krylov,
            iterations: out.iterations,
            relative_residual: out.relative_residual,
            neumann_norm_estimate: norm_estimate,
        },
    ))
}

/// Lippmann-Schwinger solve at real `k > 0`.
pub fn solve_lippmann_schwinger(
    v: &PotentialRealization,
    inc: &IncidentWave,
    tol: f64,
) -> Result<(FieldOnGrid, SolveReport)> {
    let k = inc.frequency.complex();
    if !(k.im == 0.0 && k.re > 0.0) {
        return Err(Error::Field(format!(
            "physical solve needs real k > 0, got {k}"
        )));
    }
    let grid = *v.grid();
    let op = ResolventOperator::new(grid, k, default_l_trunc(&grid))?;
    let est = neumann_norm_estimate(&op, v);
    solve_with_operator(&op, v, inc, tol, est)
}

/// Scattered-field increments `R0 (V R0)^j (V u_inc)` for j = 0..n_terms.
/// Their running sum is the Born partial sum.
pub fn born_scattered_terms(
    v: &PotentialRealization,
    inc: &IncidentWave,
    n_terms: usize,
) -> Result<Vec<FieldOnGrid>> {
    let grid = *v.grid();
    let op = ResolventOperator::new(grid, inc.frequency.complex(), default_l_trunc(&grid))?;
    let est = neumann_norm_estimate(&op, v);
    if est >= 1.0 {
        return Err(Error::BornDivergent(est));
    }
    let u_inc = incident_on_grid(&grid, inc);
    let mut w = apply_potential(v, &u_inc);
    let mut terms = Vec::with_capacity(n_terms + 1);
    for j in 0..=n_terms {
        terms.push(FieldOnGrid {
            grid,
            values: op.apply(&w),
        });
        if j < n_terms {
            w = apply_potential(v, &terms[j].values);
        }
    }
    Ok(terms)
}

/// Born partial sum `u_sc = R0 sum_{j=0}^{n_terms} (V R0)^j (V u_inc)`.
/// Refuses the divergent regime (norm estimate >= 1).
pub fn born_solve(
    v: &PotentialRealization,
    inc: &IncidentWave,
    n_terms: usize,
) -> Result<FieldOnGrid> {
    let terms = born_scattered_terms(v, inc, n_terms)?;
    let grid = *v.grid();
    let mut out = FieldOnGrid::zeros(grid);
    for t in terms {
        for (o, tv) in out.values.iter_mut().zip(t.values) {
            *o += tv;
        }
    }
    Ok(out)
}
