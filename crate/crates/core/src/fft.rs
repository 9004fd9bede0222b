//! Complex multi-dimensional FFTs on row-major `[n0, n1, n2]` buffers.
//!
//! The forward transform is scaled by `1/(n0 n1 n2)` so coefficients are
//! trigonometric-interpolation coefficients. Every 1D line is transformed by
//! the same plan regardless of how work is split across threads, so results
//! do not depend on the worker count.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

static PLANS: Lazy<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = PLANS.lock().expect("fft plan cache poisoned");
    cache
        .entry((len, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let dir = if inverse {
                FftDirection::Inverse
            } else {
                FftDirection::Forward
            };
            planner.plan_fft(len, dir)
        })
        .clone()
}

/// Transform every contiguous run of `fft.len()` values in `rows`.
fn rows_inplace(rows: &mut [Complex64], fft: &Arc<dyn Fft<f64>>, rows_per_task: usize) {
    let len = fft.len();
    let chunk = len * rows_per_task.max(1);
    rows.par_chunks_mut(chunk).for_each_init(
        || vec![Complex64::default(); fft.get_inplace_scratch_len()],
        |scratch, block| fft.process_with_scratch(block, scratch),
    );
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    // dst[c * rows + r] = src[r * cols + c]
    dst.par_chunks_mut(rows).enumerate().for_each(|(c, out)| {
        for (r, o) in out.iter_mut().enumerate() {
            *o = src[r * cols + c];
        }
    });
}

fn transform(data: &mut [Complex64], dims: [usize; 3], inverse: bool) {
    let [n0, n1, n2] = dims;
    assert_eq!(data.len(), n0 * n1 * n2, "buffer does not match dims");

    if n2 > 1 {
        let fft = plan(n2, inverse);
        rows_inplace(data, &fft, (4096 / n2).max(1));
    }

    if n1 > 1 {
        let fft = plan(n1, inverse);
        let plane = n1 * n2;
        data.par_chunks_mut(plane).for_each_init(
            || {
                (
                    vec![Complex64::default(); plane],
                    vec![Complex64::default(); fft.get_inplace_scratch_len()],
                )
            },
            |(buf, scratch), p| {
                if n2 == 1 {
                    fft.process_with_scratch(p, scratch);
                    return;
                }
                for (r, row) in p.chunks(n2).enumerate() {
                    for (c, v) in row.iter().enumerate() {
                        buf[c * n1 + r] = *v;
                    }
                }
                fft.process_with_scratch(buf, scratch);
                for (r, row) in p.chunks_mut(n2).enumerate() {
                    for (c, v) in row.iter_mut().enumerate() {
                        *v = buf[c * n1 + r];
                    }
                }
            },
        );
    }

    if n0 > 1 {
        let fft = plan(n0, inverse);
        let m = n1 * n2;
        let mut buf = vec![Complex64::default(); data.len()];
        transpose(data, &mut buf, n0, m);
        rows_inplace(&mut buf, &fft, (4096 / n0).max(1));
        transpose(&buf, data, m, n0);
    }
}

/// Forward transform, scaled by `1/N`.
pub fn forward(data: &mut [Complex64], dims: [usize; 3]) {
    transform(data, dims, false);
    let scale = 1.0 / data.len() as f64;
    data.par_chunks_mut(4096)
        .for_each(|c| c.iter_mut().for_each(|v| *v *= scale));
}

/// Unscaled inverse transform (synthesis from interpolation coefficients).
pub fn inverse(data: &mut [Complex64], dims: [usize; 3]) {
    transform(data, dims, true);
}
