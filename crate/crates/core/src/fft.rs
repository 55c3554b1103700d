//!3-D FFT on flat row-major arrays, backed by rustfft.
//!
//! Layout convention everywhere in the crate: index `(ix, iy, iz)` maps to
//! `(ix * n + iy) * n + iz`, i.e. z is the contiguous axis. Transforms are
//! unnormalized; `ifft3` divides by `n^3` so `ifft3(fft3(x)) == x` up to
//! roundoff. Lines are processed in a fixed order, keeping results
//! bit-identical across runs.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanKey = (usize, bool);

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

fn transform_axes(data: &mut [Complex64], n: usize, inverse: bool) {
    assert_eq!(data.len(), n * n * n, "array is not n^3");
    let fft = plan(n, inverse);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];

    // z axis: contiguous lines.
    for line in data.chunks_exact_mut(n) {
        fft.process_with_scratch(line, &mut scratch);
    }

    // y axis: stride n within each x-plane.
    let mut buf = vec![Complex64::default(); n];
    for ix in 0..n {
        let plane = &mut data[ix * n * n..(ix + 1) * n * n];
        for iz in 0..n {
            for iy in 0..n {
                buf[iy] = plane[iy * n + iz];
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for iy in 0..n {
                plane[iy * n + iz] = buf[iy];
            }
        }
    }

    // x axis: stride n^2.
    let n2 = n * n;
    for rem in 0..n2 {
        for ix in 0..n {
            buf[ix] = data[ix * n2 + rem];
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for ix in 0..n {
            data[ix * n2 + rem] = buf[ix];
        }
    }
}

/// Forward DFT: `X(f) = sum_j x(j) exp(-2*pi*i f.j / n)` per axis.
pub fn fft3(data: &mut [Complex64], n: usize) {
    transform_axes(data, n, false);
}

/// Inverse DFT with 1/n^3 normalization.
pub fn ifft3(data: &mut [Complex64], n: usize) {
    transform_axes(data, n, true);
    let scale = 1.0 / (n as f64).powi(3);
    for v in data.iter_mut() {
        *v *= scale;
    }
}
