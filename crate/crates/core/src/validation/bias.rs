//! Upward bias of plug-in estimates of convex functionals.
//!
//! Means over replicates should sit above the truth and shrink with `t`.
//! The stopped variant scans the `t` grid from the top down and stops at the
//! first estimate below a threshold; that is a stopping time for the
//! exchangeable (reverse) filtration, so optional stopping applies.

use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::replicate_rng;
use crate::error::{Error, Result};
use crate::estimators::finite::{kl_probs, tv_probs};
use crate::estimators::ks::ks_one_sample_sorted;
use crate::estimators::KernelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BiasKind {
    /// `sup |F_t - F|` for Uniform(0, 1).
    Ks,
    /// TV to the uniform law on 4 points, sampled from it.
    Tv,
    /// KL to `(0.2, 0.3, 0.5)`, sampled from it.
    Kl,
    /// Paired Gaussian-kernel `MMD_V`, both streams N(0, 1).
    Mmd,
    /// Paired U-statistic `MMD^2`, both streams N(0, 1); unbiased control.
    MmdU,
    /// TV between samples of `(0.3, 0.7)` and the law `(0.5, 0.5)`; truth 0.2.
    TvShifted,
}

impl BiasKind {
    pub const ALL: [BiasKind; 6] = [Self::Ks, Self::Tv, Self::Kl, Self::Mmd, Self::MmdU, Self::TvShifted];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Ks => "ks",
            Self::Tv => "tv",
            Self::Kl => "kl",
            Self::Mmd => "mmd",
            Self::MmdU => "mmd-u",
            Self::TvShifted => "tv-shifted",
        }
    }

    pub fn truth(&self) -> f64 {
        match self {
            Self::TvShifted => 0.2,
            _ => 0.0,
        }
    }

    fn threshold(&self) -> f64 {
        match self {
            Self::Ks => 0.14,
            Self::Tv => 0.1,
            Self::Kl => 0.025,
            Self::Mmd => 0.2,
            Self::MmdU => 0.0,
            Self::TvShifted => 0.25,
        }
    }

    fn unbiased(&self) -> bool {
        *self == Self::MmdU
    }
}

impl FromStr for BiasKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown bias kind '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasPoint {
    pub t: u64,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasReport {
    pub kind: BiasKind,
    pub truth: f64,
    pub points: Vec<BiasPoint>,
    /// Mean estimate at the stopping time (its `t` field is the mean stopping time).
    pub stopped: BiasPoint,
    pub passed: bool,
}

fn mean_se(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let mean = v.clone().sum::<f64>() / n;
    let var = if n > 1.0 { v.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, (var / n).sqrt())
}

/// Paired kernel sums for `MMD_V` and `MMD_U^2`.
struct PairedSums {
    k: KernelSpec,
    x: Vec<f64>,
    y: Vec<f64>,
    sxx: f64,
    syy: f64,
    sxy: f64,
    diag: f64,
}

impl PairedSums {
    fn push(&mut self, a: f64, b: f64) {
        let k = |u: f64, v: f64| self.k.eval(&[u], &[v]);
        let (mut cx, mut cy, mut cxy) = (0.0, 0.0, 0.0);
        for (&u, &v) in self.x.iter().zip(&self.y) {
            cx += k(a, u);
            cy += k(b, v);
            cxy += k(a, v) + k(u, b);
        }
        self.sxx += 2.0 * cx + k(a, a);
        self.syy += 2.0 * cy + k(b, b);
        let own = k(a, b);
        self.sxy += cxy + own;
        self.diag += k(a, a) + k(b, b) - 2.0 * own;
        self.x.push(a);
        self.y.push(b);
    }

    fn v(&self) -> f64 {
        let t2 = (self.x.len() * self.x.len()) as f64;
        ((self.sxx + self.syy - 2.0 * self.sxy) / t2).max(0.0).sqrt()
    }

    fn u(&self) -> f64 {
        let t = self.x.len() as f64;
        (self.sxx + self.syy - 2.0 * self.sxy - self.diag) / (t * (t - 1.0))
    }
}

/// Estimates at each grid time along one trajectory.
fn path(kind: BiasKind, grid: &[u64], rng: &mut impl Rng) -> Result<Vec<f64>> {
    let t_max = *grid.last().expect("grid is nonempty");
    let mut out = Vec::with_capacity(grid.len());
    let mut next = grid.iter().peekable();
    match kind {
        BiasKind::Ks => {
            let mut xs = Vec::new();
            for t in 1..=t_max {
                xs.push(rng.random::<f64>());
                if next.next_if(|&&g| g == t).is_some() {
                    let mut s = xs.clone();
                    s.sort_by(f64::total_cmp);
                    out.push(ks_one_sample_sorted(&s, |x| x));
                }
            }
        }
        BiasKind::Tv | BiasKind::Kl | BiasKind::TvShifted => {
            let (sample, reference): (&[f64], &[f64]) = match kind {
                BiasKind::Tv => (&[0.25; 4], &[0.25; 4]),
                BiasKind::Kl => (&[0.2, 0.3, 0.5], &[0.2, 0.3, 0.5]),
                _ => (&[0.3, 0.7], &[0.5, 0.5]),
            };
            let mut counts = vec![0u64; sample.len()];
            for t in 1..=t_max {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut j = sample.len() - 1;
                for (i, &w) in sample.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        j = i;
                        break;
                    }
                }
                counts[j] += 1;
                if next.next_if(|&&g| g == t).is_some() {
                    let q: Vec<f64> = counts.iter().map(|&c| c as f64 / t as f64).collect();
                    out.push(if kind == BiasKind::Kl { kl_probs(&q, reference)? } else { tv_probs(&q, reference) });
                }
            }
        }
        BiasKind::Mmd | BiasKind::MmdU => {
            let mut sums = PairedSums {
                k: KernelSpec::gaussian(1.0)?,
                x: Vec::new(),
                y: Vec::new(),
                sxx: 0.0,
                syy: 0.0,
                sxy: 0.0,
                diag: 0.0,
            };
            for t in 1..=t_max {
                sums.push(rng.sample(StandardNormal), rng.sample(StandardNormal));
                if next.next_if(|&&g| g == t).is_some() {
                    out.push(if kind == BiasKind::Mmd { sums.v() } else { sums.u() });
                }
            }
        }
    }
    Ok(out)
}

pub fn bias_direction_check(kind: BiasKind, grid: &[u64], replications: u64, seed: u64) -> Result<BiasReport> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 || replications < 2 {
        return Err(Error::InvalidArgument("grid must be increasing and positive, R >= 2".into()));
    }
    if kind == BiasKind::MmdU && grid[0] < 2 {
        return Err(Error::InsufficientData { needed: 2, got: grid[0] as usize });
    }
    let paths: Vec<Vec<f64>> = (0..replications)
        .into_par_iter()
        .map(|r| path(kind, grid, &mut replicate_rng(seed, r)))
        .collect::<Result<_>>()?;
    let truth = kind.truth();
    let points: Vec<BiasPoint> = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let (mean, std_error) = mean_se(paths.iter().map(move |p| p[i]));
            BiasPoint { t, mean, std_error }
        })
        .collect();
    // reverse-time stopping: the largest grid time whose estimate is below the threshold
    let thr = kind.threshold();
    let stops: Vec<(u64, f64)> = paths
        .iter()
        .map(|p| {
            let i = (0..grid.len()).rev().find(|&i| p[i] < thr).unwrap_or(0);
            (grid[i], p[i])
        })
        .collect();
    let (mean, std_error) = mean_se(stops.iter().map(|s| s.1));
    let mean_tau = stops.iter().map(|s| s.0 as f64).sum::<f64>() / stops.len() as f64;
    let stopped = BiasPoint { t: mean_tau.round() as u64, mean, std_error };

    let passed = if kind.unbiased() {
        points.iter().chain([&stopped]).all(|p| (p.mean - truth).abs() <= 3.0 * p.std_error)
    } else {
        let above = points.iter().all(|p| p.mean > truth) && stopped.mean >= truth - 3.0 * stopped.std_error;
        let shrinking = points
            .windows(2)
            .all(|w| w[1].mean <= w[0].mean + 3.0 * (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt());
        above && shrinking
    };
    Ok(BiasReport { kind, truth, points, stopped, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{mmd_u_squared, mmd_v, EmpiricalSample};

    #[test]
    fn all_kinds_pass_small() {
        for kind in BiasKind::ALL {
            let r = bias_direction_check(kind, &[10, 20, 40], 400, 9).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn kl_scales_like_dimension_over_2t() {
        let r = bias_direction_check(BiasKind::Kl, &[40, 80], 2000, 1).unwrap();
        for p in &r.points {
            let expected = 2.0 / (2.0 * p.t as f64);
            assert!((p.mean - expected).abs() < 0.2 * expected, "{p:?}");
        }
    }

    #[test]
    fn paired_sums_match_batch() {
        let k = KernelSpec::gaussian(1.0).unwrap();
        let mut s = PairedSums { k: k.clone(), x: vec![], y: vec![], sxx: 0.0, syy: 0.0, sxy: 0.0, diag: 0.0 };
        let mut rng = replicate_rng(2, 0);
        for _ in 0..15 {
            s.push(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
        let (x, y) = (EmpiricalSample::from_scalars(s.x.clone()), EmpiricalSample::from_scalars(s.y.clone()));
        assert!((s.v() - mmd_v(&x, &y, &k).unwrap()).abs() < 1e-12);
        assert!((s.u() - mmd_u_squared(&x, &y, &k).unwrap()).abs() < 1e-12);
    }
}
