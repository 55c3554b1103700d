//! Discrete free resolvent: exact padded cyclic convolution with the
//! sampled truncated kernel.
//!
//! The kernel is sampled on the doubled (2n)^3 difference lattice, so the
//! cyclic convolution reproduces the direct sum
//! `(R0 f)(x) = sum_y Phi_k^L(x - y) f(y) dV` without wrap-around for any
//! `f` supported on the grid. The singular cell `z = 0` carries the
//! equivalent-volume-ball average of the kernel.

use super::kernel::{check_truncation, kernel_value, singular_cell_average};
use super::FieldOnGrid;
use crate::error::Result;
use crate::fft::{fft3, ifft3};
use crate::gridfield::GridSpec3;
use num_complex::Complex64;

pub struct ResolventOperator {
    grid: GridSpec3,
    k: Complex64,
    l_trunc: f64,
    pad_n: usize,
    /// Forward DFT of the sampled kernel on the padded lattice.
    kernel_hat: Vec<Complex64>,
}

impl ResolventOperator {
    pub fn new(grid: GridSpec3, k: Complex64, l_trunc: f64) -> Result<Self> {
        check_truncation(&grid, l_trunc)?;
        let n = grid.n();
        let pad_n = 2 * n;
        let spacing = grid.spacing();
        let mut kernel = vec![Complex64::default(); pad_n * pad_n * pad_n];
        let wrap = |i: usize| -> f64 {
            // Padded index -> signed difference in lattice steps.
            if i < n {
                i as f64
            } else {
                i as f64 - pad_n as f64
            }
        };
        for ix in 0..pad_n {
            let zx = wrap(ix) * spacing;
            for iy in 0..pad_n {
                let zy = wrap(iy) * spacing;
                for iz in 0..pad_n {
                    let zz = wrap(iz) * spacing;
                    let r = (zx * zx + zy * zy + zz * zz).sqrt();
                    let idx = (ix * pad_n + iy) * pad_n + iz;
                    if r == 0.0 {
                        kernel[idx] = singular_cell_average(k, grid.cell_volume());
                    } else if r <= l_trunc {
                        kernel[idx] = kernel_value(k, r);
                    }
                }
            }
        }
        fft3(&mut kernel, pad_n);
        Ok(ResolventOperator {
            grid,
            k,
            l_trunc,
            pad_n,
            kernel_hat: kernel,
        })
    }

    pub fn grid(&self) -> &GridSpec3 {
        &self.grid
    }

    pub fn k(&self) -> Complex64 {
        self.k
    }

    pub fn l_trunc(&self) -> f64 {
        self.l_trunc
    }

    /// `R0(k) f` on the grid.
    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.n();
        let pad_n = self.pad_n;
        assert_eq!(f.len(), self.grid.node_count());
        let mut work = vec![Complex64::default(); pad_n * pad_n * pad_n];
        for ix in 0..n {
            for iy in 0..n {
                let src = (ix * n + iy) * n;
                let dst = (ix * pad_n + iy) * pad_n;
                work[dst..dst + n].copy_from_slice(&f[src..src + n]);
            }
        }
        fft3(&mut work, pad_n);
        for (w, k) in work.iter_mut().zip(self.kernel_hat.iter()) {
            *w *= k;
        }
        ifft3(&mut work, pad_n);
        let dv = self.grid.cell_volume();
        let mut out = vec![Complex64::default(); self.grid.node_count()];
        for ix in 0..n {
            for iy in 0..n {
                let dst = (ix * n + iy) * n;
                let src = (ix * pad_n + iy) * pad_n;
                for iz in 0..n {
                    out[dst + iz] = work[src + iz] * dv;
                }
            }
        }
        out
    }

    /// Direct O(N^2) kernel sum; the oracle the convolution must reproduce.
    pub fn apply_direct(&self, f: &[Complex64]) -> Vec<Complex64> {
        let grid = &self.grid;
        let count = grid.node_count();
        let dv = grid.cell_volume();
        let mut out = vec![Complex64::default(); count];
        for (xi, o) in out.iter_mut().enumerate() {
            let x = grid.node_coords(xi);
            let mut acc = Complex64::default();
            for (yi, fv) in f.iter().enumerate() {
                if fv.re == 0.0 && fv.im == 0.0 {
                    continue;
                }
                let y = grid.node_coords(yi);
                let r = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2))
                    .sqrt();
                let kv = if r == 0.0 {
                    singular_cell_average(self.k, grid.cell_volume())
                } else if r <= self.l_trunc {
                    kernel_value(self.k, r)
                } else {
                    continue;
                };
                acc += kv * fv;
            }
            *o = acc * dv;
        }
        out
    }
}

/// One-shot convenience wrapper around [`ResolventOperator`].
pub fn apply_free_resolvent(f: &FieldOnGrid, k: Complex64, l_trunc: f64) -> Result<FieldOnGrid> {
    let op = ResolventOperator::new(f.grid, k, l_trunc)?;
    Ok(FieldOnGrid {
        grid: f.grid,
        values: op.apply(&f.values),
    })
}
