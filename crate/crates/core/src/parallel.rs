use num_complex::Complex64;
use rayon::prelude::*;

const CHUNK: usize = 4096;

/// Sum of `f(0) + ... + f(count - 1)`, evaluated in parallel over fixed
/// chunks and combined in chunk order so the result does not depend on the
/// thread count.
pub fn ordered_sum<F>(count: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let chunks = count.div_ceil(CHUNK);
    let partial: Vec<Complex64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let end = ((c + 1) * CHUNK).min(count);
            let mut acc = Complex64::new(0.0, 0.0);
            for i in c * CHUNK..end {
                acc += f(i);
            }
            acc
        })
        .collect();
    partial.into_iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b)
}

/// Real counterpart of [`ordered_sum`].
pub fn ordered_sum_real<F>(count: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    ordered_sum(count, |i| Complex64::new(f(i), 0.0)).re
}
