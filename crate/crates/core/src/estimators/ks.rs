//! Kolmogorov-Smirnov distances `||F_t - F||_inf` and `||F_t - G_s||_inf`.

use super::sample::EmpiricalSample;
use crate::error::{Error, Result};

pub fn ks_one_sample<F: Fn(f64) -> f64>(x: &EmpiricalSample, cdf: F) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(ks_one_sample_sorted(&x.sorted_scalars()?, cdf))
}

/// Same as [`ks_one_sample`] for data already in ascending order.
pub fn ks_one_sample_sorted<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let t = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &v) in sorted.iter().enumerate() {
        let f = cdf(v);
        let above = (i + 1) as f64 / t - f;
        let below = f - i as f64 / t;
        d = d.max(above).max(below);
    }
    d
}

pub fn ks_two_sample(x: &EmpiricalSample, y: &EmpiricalSample) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(ks_two_sample_sorted(&x.sorted_scalars()?, &y.sorted_scalars()?))
}

/// Same as [`ks_two_sample`] for data already in ascending order.
pub fn ks_two_sample_sorted(x: &[f64], y: &[f64]) -> f64 {
    let (t, s) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / t - j as f64 / s).abs());
    }
    // once one sample is exhausted the gap only shrinks toward zero
    d.max((i as f64 / t - j as f64 / s).abs())
}
