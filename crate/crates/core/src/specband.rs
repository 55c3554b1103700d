//! Numerical probes of the resolvent norm laws, the Neumann threshold, and
//! the analytic-continuation band discrepancy.
//!
//! Operator norms here are estimates (power iteration with a fixed seeded
//! start), used as regime gates with slack, never as certified bounds.

use crate::dataset::SweepMethod;
use crate::error::{Error, Result};
use crate::forward::{
    far_field, incident_field, neumann_norm_estimate, solve_with_operator, total_field,
    Frequency, IncidentWave, ResolventOperator,
};
use crate::gridfield::{GridSpec3, PotentialRealization};
use crate::rng::CounterRng;
use crate::sphere;
use num_complex::Complex64;
use rayon::prelude::*;

const NORM_POWER_ITERS: usize = 30;
const NORM_POWER_SEED: u64 = 0x7e57_ab1e;

/// Estimated L2 -> L2 norms of `chi R0(lambda) chi` over a set of complex
/// frequencies.
#[derive(Debug, Clone)]
pub struct ResolventProbe {
    pub lambda_grid: Vec<Complex64>,
    pub norms: Vec<f64>,
    /// Diameter of the cutoff support; the `L` in the `e^{L (Im k)_-}` law.
    pub cutoff_diam: f64,
}

impl ResolventProbe {
    pub fn validate(&self) -> Result<()> {
        if self.lambda_grid.len() != self.norms.len() {
            return Err(Error::Mismatch("probe arrays differ in length".into()));
        }
        if self.lambda_grid.iter().any(|l| !(l.norm() > 0.0)) {
            return Err(Error::Field("lambda grid must avoid 0".into()));
        }
        if self.norms.iter().any(|n| !(*n >= 0.0)) {
            return Err(Error::Field("norms must be >= 0".into()));
        }
        Ok(())
    }
}

/// Reference shape `(1 + |lambda|)^{-1} e^{L (Im lambda)_-}` for probe
/// reports (t = s case of the resolvent estimate).
pub fn resolvent_bound_shape(lambda: Complex64, cutoff_diam: f64) -> f64 {
    let im_minus = (-lambda.im).max(0.0);
    (1.0 + lambda.norm()).powi(-1) * (cutoff_diam * im_minus).exp()
}

fn chi_mask(grid: &GridSpec3, chi_radius: f64) -> Vec<bool> {
    (0..grid.node_count())
        .map(|i| {
            let x = grid.node_coords(i);
            (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() <= chi_radius
        })
        .collect()
}

/// Largest singular value of the discretized `chi R0(k) chi`
/// (chi = indicator of the ball of radius `chi_radius`), estimated by
/// `NORM_POWER_ITERS` power iterations on `A* A`. The convolution carries
/// the cell-volume weight, so this approximates the continuum L2 norm.
pub fn resolvent_norm_estimate(
    k: Complex64,
    grid: &GridSpec3,
    chi_radius: f64,
    l_trunc: f64,
) -> Result<f64> {
    if !(k.norm() > 0.0) {
        return Err(Error::Field("resolvent probe needs |k| > 0".into()));
    }
    let op = ResolventOperator::new(*grid, k, l_trunc)?;
    let mask = chi_mask(grid, chi_radius);
    let apply_a = |f: &[Complex64]| -> Vec<Complex64> {
        let cut: Vec<Complex64> = f
            .iter()
            .zip(&mask)
            .map(|(v, m)| if *m { *v } else { Complex64::default() })
            .collect();
        let mut out = op.apply(&cut);
        for (o, m) in out.iter_mut().zip(&mask) {
            if !*m {
                *o = Complex64::default();
            }
        }
        out
    };
    // The convolution matrix is symmetric (even kernel), so the adjoint is
    // plain conjugation: A* f = conj(A conj(f)).
    let apply_ata = |f: &[Complex64]| -> Vec<Complex64> {
        let y = apply_a(f);
        let yc: Vec<Complex64> = y.iter().map(|v| v.conj()).collect();
        apply_a(&yc).iter().map(|v| v.conj()).collect()
    };

    let mut rng = CounterRng::new(NORM_POWER_SEED, 0);
    let mut x: Vec<Complex64> = (0..grid.node_count())
        .map(|_| {
            let (a, b) = rng.normal_pair();
            Complex64::new(a, b)
        })
        .collect();
    let mut nx = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    for v in x.iter_mut() {
        *v /= nx;
    }
    let mut ratios = Vec::with_capacity(NORM_POWER_ITERS);
    for _ in 0..NORM_POWER_ITERS {
        let mut y = apply_ata(&x);
        nx = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if nx == 0.0 {
            return Ok(0.0);
        }
        ratios.push(nx);
        for v in y.iter_mut() {
            *v /= nx;
        }
        x = y;
    }
    let tail = &ratios[ratios.len() - 5..];
    let sigma_sq = (tail.iter().map(|r| r.ln()).sum::<f64>() / tail.len() as f64).exp();
    Ok(sigma_sq.sqrt())
}

/// Norm estimates over a whole lambda grid, parallel with fixed output
/// order.
pub fn resolvent_probe(
    lambda_grid: &[Complex64],
    grid: &GridSpec3,
    chi_radius: f64,
    l_trunc: f64,
) -> Result<ResolventProbe> {
    let norms: Vec<Result<f64>> = lambda_grid
        .par_iter()
        .map(|&l| resolvent_norm_estimate(l, grid, chi_radius, l_trunc))
        .collect();
    let norms = norms.into_iter().collect::<Result<Vec<f64>>>()?;
    let probe = ResolventProbe {
        lambda_grid: lambda_grid.to_vec(),
        norms,
        cutoff_diam: 2.0 * chi_radius,
    };
    probe.validate()?;
    Ok(probe)
}

/// Smallest k in the grid whose power-iteration estimate of `R0(k) V` drops
/// to 1/2 or below; `+inf` when none qualifies.
pub fn neumann_threshold(v: &PotentialRealization, k_grid: &[f64]) -> Result<f64> {
    if k_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Field("k grid must be ascending".into()));
    }
    let grid = *v.grid();
    for &k in k_grid {
        let op = ResolventOperator::new(grid, Complex64::new(k, 0.0), 2.0 * grid.l_box())?;
        if neumann_norm_estimate(&op, v) <= 0.5 {
            return Ok(k);
        }
    }
    Ok(f64::INFINITY)
}

/// Slab geometry for the analytic-continuation bound: the data band is
/// `(K0, K]` inside the infinite slab of half-height `h0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabParams {
    pub k0: f64,
    pub k_upper: f64,
    pub h0: f64,
}

impl SlabParams {
    pub fn new(k0: f64, k_upper: f64, h0: f64) -> Result<Self> {
        if !(0.0 < k0 && k0 < k_upper) {
            return Err(Error::Field(format!(
                "slab needs 0 < K0 < K, got K0 = {k0}, K = {k_upper}"
            )));
        }
        if !(h0 > 0.0) {
            return Err(Error::Field(format!("slab height must be > 0, got {h0}")));
        }
        Ok(SlabParams { k0, k_upper, h0 })
    }

    pub fn band_width(&self) -> f64 {
        self.k_upper - self.k0
    }
}

/// The closed-form continuation exponent lower bound
/// `mu(z) >= 64 a h0 / (3 pi^2 (a^2 + 4 h0^2)) * e^{(pi / 2 h0)(a/2 - z)}`.
pub fn mu_lower_bound_value(a: f64, h0: f64, z: f64) -> f64 {
    let pi = std::f64::consts::PI;
    64.0 * a * h0 / (3.0 * pi * pi * (a * a + 4.0 * h0 * h0))
        * ((pi / (2.0 * h0)) * (a / 2.0 - z)).exp()
}

/// Continuation exponent bound beyond the data band; rejects `z <= K`.
pub fn mu_lower_bound(slab: &SlabParams, z: f64) -> Result<f64> {
    if !(z > slab.k_upper) {
        return Err(Error::Field(format!(
            "continuation point z = {z} must exceed K = {}",
            slab.k_upper
        )));
    }
    Ok(mu_lower_bound_value(slab.band_width(), slab.h0, z))
}

/// Backscattered far fields at explicit complex frequencies, for the
/// analytic-continuation probes.
#[derive(Debug, Clone)]
pub struct ComplexFarFieldTable {
    pub directions: Vec<[f64; 3]>,
    pub frequencies: Vec<Complex64>,
    /// Direction-major: `values[dir * n_freq + freq]`.
    pub values: Vec<Complex64>,
    pub m: f64,
}

impl ComplexFarFieldTable {
    fn lookup(&self, w: Complex64) -> Result<usize> {
        let tol = 1e-9 * (1.0 + w.norm());
        self.frequencies
            .iter()
            .position(|f| (f - w).norm() <= tol)
            .ok_or_else(|| {
                Error::Coverage(format!("missing complex-frequency coverage at {w}"))
            })
    }

    /// `u_inf(-theta_d, theta_d, w)`, with negative arguments reached by
    /// the reflection `u(-w) = conj(u(conj w))` valid for real potentials.
    pub fn value_at(&self, dir: usize, w: Complex64) -> Result<Complex64> {
        match self.lookup(w) {
            Ok(j) => Ok(self.values[dir * self.frequencies.len() + j]),
            Err(e) => {
                let j = self.lookup(-w.conj()).map_err(|_| e)?;
                Ok(self.values[dir * self.frequencies.len() + j].conj())
            }
        }
    }

    pub fn im_coverage(&self) -> f64 {
        self.frequencies
            .iter()
            .map(|f| f.im.abs())
            .fold(0.0, f64::max)
    }
}

/// Complex frequencies needed by [`epsilon_band_complex`] at `(k, tau)`
/// with an `n_t + 1`-node trapezoid over t in [1, 2]: `k t`, `k t + tau`,
/// and their conjugates (the reflection supplies the negative arguments).
pub fn band_requirements(k: Complex64, tau: f64, n_t: usize) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(4 * (n_t + 1));
    for j in 0..=n_t {
        let t = 1.0 + j as f64 / n_t as f64;
        let w1 = k * t;
        let w2 = w1 + tau;
        for w in [w1, w2, w1.conj(), w2.conj()] {
            if !out
                .iter()
                .any(|f| (f - w).norm() <= 1e-12 * (1.0 + w.norm()))
            {
                out.push(w);
            }
        }
    }
    out
}

/// Builds a complex far-field table by solving at each listed frequency.
/// `Born0` sums the zeroth term directly; `Krylov` runs full solves
/// (complex-frequency kernels reuse the same truncated machinery).
pub fn complex_backscatter_table(
    v: &PotentialRealization,
    directions: &[[f64; 3]],
    frequencies: &[Complex64],
    tol: f64,
    method: SweepMethod,
) -> Result<ComplexFarFieldTable> {
    let grid = *v.grid();
    let nf = frequencies.len();
    let mut values = vec![Complex64::default(); directions.len() * nf];
    let per_freq: Vec<Result<Vec<Complex64>>> = frequencies
        .par_iter()
        .map(|&w| -> Result<Vec<Complex64>> {
            if !(w.norm() > 0.0) {
                return Err(Error::Field("complex frequency must satisfy |k| > 0".into()));
            }
            match method {
                SweepMethod::Born0 => {
                    let dv = grid.cell_volume();
                    let support = v.support_entries();
                    Ok(directions
                        .iter()
                        .map(|theta| {
                            let mut acc = Complex64::default();
                            for (_, y, vv) in &support {
                                let t = theta[0] * y[0] + theta[1] * y[1] + theta[2] * y[2];
                                acc += (Complex64::new(0.0, 2.0) * w * t).exp() * *vv;
                            }
                            acc * dv / (4.0 * std::f64::consts::PI)
                        })
                        .collect())
                }
                SweepMethod::Krylov | SweepMethod::Born => {
                    let op = ResolventOperator::new(grid, w, 2.0 * grid.l_box())?;
                    let est = neumann_norm_estimate(&op, v);
                    directions
                        .iter()
                        .map(|theta| -> Result<Complex64> {
                            let inc = IncidentWave::new(*theta, Frequency::new(w)?)?;
                            let (u_sc, _) = solve_with_operator(&op, v, &inc, tol, est)?;
                            let u_inc = incident_field(v, &inc);
                            Ok(far_field(
                                v,
                                &total_field(&u_inc, &u_sc),
                                [-theta[0], -theta[1], -theta[2]],
                                w,
                            ))
                        })
                        .collect()
                }
            }
        })
        .collect();
    for (j, col) in per_freq.into_iter().enumerate() {
        let col = col?;
        for (d, val) in col.into_iter().enumerate() {
            values[d * nf + j] = val;
        }
    }
    Ok(ComplexFarFieldTable {
        directions: directions.to_vec(),
        frequencies: frequencies.to_vec(),
        values,
        m: v.order(),
    })
}

/// Meromorphic band discrepancy
/// `eps^2(k, tau) = k^{2m} int_1^2 t^{2m} int_{S^2} U1 U2 dsigma dt` with
/// `U1, U2` built from far fields at `+-kt` and `+-(kt + tau)`. On the real
/// axis this reduces to the band average of `|s^m U|^2`.
pub fn epsilon_band_complex(
    table1: &ComplexFarFieldTable,
    table2: &ComplexFarFieldTable,
    k: Complex64,
    tau: f64,
    n_t: usize,
) -> Result<Complex64> {
    if table1.directions != table2.directions {
        return Err(Error::Mismatch("tables use different direction grids".into()));
    }
    if table1.m != table2.m {
        return Err(Error::Mismatch("tables use different orders m".into()));
    }
    if !(tau > 0.0 && tau < 0.5) {
        return Err(Error::Field(format!("tau = {tau} outside (0, 1/2)")));
    }
    if n_t < 2 {
        return Err(Error::Field("need at least 2 trapezoid panels".into()));
    }
    let needed_im = (k * 2.0).im.abs();
    let have = table1.im_coverage().max(table2.im_coverage());
    if k.im != 0.0 && needed_im > have + 1e-12 {
        return Err(Error::Coverage(format!(
            "tables cover |Im| <= {have}, need {needed_im}"
        )));
    }
    let m = table1.m;
    let n_dir = table1.directions.len();
    let w_dir = sphere::uniform_weight(n_dir);
    let dt = 1.0 / n_t as f64;
    let mut integral = Complex64::default();
    for j in 0..=n_t {
        let t = 1.0 + j as f64 * dt;
        let w1 = k * t;
        let w2 = w1 + tau;
        let mut sphere_sum = Complex64::default();
        for d in 0..n_dir {
            let u1 = table1.value_at(d, -w2)? * table1.value_at(d, w1)?
                - table2.value_at(d, -w2)? * table2.value_at(d, w1)?;
            let u2 = table1.value_at(d, w2)? * table1.value_at(d, -w1)?
                - table2.value_at(d, w2)? * table2.value_at(d, -w1)?;
            sphere_sum += u1 * u2;
        }
        let weight = if j == 0 || j == n_t { 0.5 } else { 1.0 };
        integral += weight * dt * Complex64::new(t, 0.0).powf(2.0 * m) * w_dir * sphere_sum;
    }
    Ok(k.powf(2.0 * m) * integral)
}
