//! Gaussian-smoothed divergences in one dimension.
//!
//! `f` is the exact density of `P_t * N(0, sigma^2)`, a Gaussian mixture.
//!
//! ```text
//! TV      = 1/2 int |f - g|
//! W1      = int |F - G|
//! Entropy = -int f log f
//! ```

use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::erfc;

use super::sample::EmpiricalSample;
use crate::error::{Error, Result};

const CUTOFF: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothedKind {
    Tv,
    W1,
    Entropy,
}

#[derive(Debug, Clone, Copy)]
pub enum SmoothedReference<'a> {
    /// Second empirical measure, smoothed with the same kernel.
    Sample(&'a EmpiricalSample),
    /// `N(mean, sd^2)` before smoothing.
    Gaussian { mean: f64, sd: f64 },
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    /// Integration range extends this many `sigma` beyond the data.
    pub pad: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-8, pad: 8.0 }
    }
}

fn std_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

fn std_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Density and CDF of a smoothed empirical measure.
struct Mixture {
    points: Vec<f64>,
    sigma: f64,
}

impl Mixture {
    fn range(&self, u: f64) -> (usize, usize) {
        let w = CUTOFF * self.sigma;
        (self.points.partition_point(|&x| x < u - w), self.points.partition_point(|&x| x <= u + w))
    }

    fn pdf(&self, u: f64) -> f64 {
        let (a, b) = self.range(u);
        let s: f64 = self.points[a..b].iter().map(|&x| std_pdf((u - x) / self.sigma)).sum();
        s / (self.sigma * self.points.len() as f64)
    }

    fn cdf(&self, u: f64) -> f64 {
        let (a, b) = self.range(u);
        let s: f64 = self.points[a..b].iter().map(|&x| std_cdf((u - x) / self.sigma)).sum();
        (a as f64 + s) / self.points.len() as f64
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson on `[a, b]`, pre-split into cells of width `cell`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cell: f64, abs_tol: f64) -> f64 {
    let cells = (((b - a) / cell).ceil() as usize).max(1);
    let h = (b - a) / cells as f64;
    let tol = abs_tol / cells as f64;
    (0..cells)
        .map(|k| {
            let (lo, hi) = (a + k as f64 * h, a + (k + 1) as f64 * h);
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson(&f, lo, hi, fa, fm, fb, whole, tol, 40)
        })
        .sum()
}

pub fn smoothed_estimators_1d(
    x: &EmpiricalSample,
    reference: SmoothedReference<'_>,
    sigma: f64,
    which: SmoothedKind,
    quad: QuadratureSpec,
) -> Result<f64> {
    if x.dim() != 1 {
        return Err(Error::UnsupportedDimension(x.dim()));
    }
    if x.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument("sigma must be positive".into()));
    }
    let px = Mixture { points: x.sorted_scalars()?, sigma };
    let mut lo = px.points[0] - quad.pad * sigma;
    let mut hi = px.points[px.points.len() - 1] + quad.pad * sigma;
    let py = match reference {
        SmoothedReference::Sample(y) => {
            if y.dim() != 1 {
                return Err(Error::UnsupportedDimension(y.dim()));
            }
            if y.is_empty() {
                return Err(Error::EmptySample);
            }
            let m = Mixture { points: y.sorted_scalars()?, sigma };
            lo = lo.min(m.points[0] - quad.pad * sigma);
            hi = hi.max(m.points[m.points.len() - 1] + quad.pad * sigma);
            Some(m)
        }
        SmoothedReference::Gaussian { mean, sd } => {
            let s = (sd * sd + sigma * sigma).sqrt();
            lo = lo.min(mean - quad.pad * s);
            hi = hi.max(mean + quad.pad * s);
            None
        }
        SmoothedReference::None => None,
    };
    let gauss = match reference {
        SmoothedReference::Gaussian { mean, sd } => Some((mean, (sd * sd + sigma * sigma).sqrt())),
        _ => None,
    };
    let ref_pdf = |u: f64| match (&py, gauss) {
        (Some(m), _) => m.pdf(u),
        (None, Some((mu, s))) => std_pdf((u - mu) / s) / s,
        _ => 0.0,
    };
    let ref_cdf = |u: f64| match (&py, gauss) {
        (Some(m), _) => m.cdf(u),
        (None, Some((mu, s))) => std_cdf((u - mu) / s),
        _ => 0.0,
    };
    let has_ref = py.is_some() || gauss.is_some();
    let cell = sigma;
    Ok(match which {
        SmoothedKind::Tv => {
            if !has_ref {
                return Err(Error::InvalidArgument("TV needs a reference measure".into()));
            }
            0.5 * integrate(|u| (px.pdf(u) - ref_pdf(u)).abs(), lo, hi, cell, quad.abs_tol)
        }
        SmoothedKind::W1 => {
            if !has_ref {
                return Err(Error::InvalidArgument("W1 needs a reference measure".into()));
            }
            integrate(|u| (px.cdf(u) - ref_cdf(u)).abs(), lo, hi, cell, quad.abs_tol)
        }
        SmoothedKind::Entropy => integrate(
            |u| {
                let f = px.pdf(u);
                if f > 0.0 {
                    -f * f.ln()
                } else {
                    0.0
                }
            },
            lo,
            hi,
            cell,
            quad.abs_tol,
        ),
    })
}
