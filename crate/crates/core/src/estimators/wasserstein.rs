//! One-dimensional Wasserstein-1 distance `int |F_t - G_s|`.

use super::sample::EmpiricalSample;
use crate::error::{Error, Result};

pub fn w1_1d(x: &EmpiricalSample, y: &EmpiricalSample) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(w1_sorted(&x.sorted_scalars()?, &y.sorted_scalars()?))
}

/// Sweeps the merged breakpoints of two ascending samples.
pub fn w1_sorted(x: &[f64], y: &[f64]) -> f64 {
    let (t, s) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut last = x[0].min(y[0]);
    let mut total = 0.0;
    while i < x.len() || j < y.len() {
        let v = match (x.get(i), y.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        total += (i as f64 / t - j as f64 / s).abs() * (v - last);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        last = v;
    }
    total
}
