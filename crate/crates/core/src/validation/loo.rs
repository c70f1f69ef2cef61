//! Exhaustive leave-one-out audit.
//!
//! A convex functional of the empirical measure satisfies
//! `D(P_{t+1}) <= 1/(t+1) sum_i D(P_t^{(-i)})`, where `P_t^{(-i)}` drops the
//! `i`-th of `t+1` points. U-statistics satisfy it with equality.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::finite::{kl_probs, ks_probs, tv_probs, w1_probs};
use crate::estimators::{mmd_v_weighted, ot_cost_discrete, CostSpec, EmpiricalSample, KernelSpec};

pub const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LooKind {
    Tv,
    Kl,
    Ks,
    W1,
    MmdLinear,
    Ot,
    UStatistic,
}

impl LooKind {
    pub const ALL: [LooKind; 7] = [Self::Tv, Self::Kl, Self::Ks, Self::W1, Self::MmdLinear, Self::Ot, Self::UStatistic];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Tv => "tv",
            Self::Kl => "kl",
            Self::Ks => "ks",
            Self::W1 => "w1",
            Self::MmdLinear => "mmd-linear",
            Self::Ot => "ot",
            Self::UStatistic => "u-statistic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LooReport {
    pub kind: LooKind,
    pub alphabet_size: usize,
    pub t_max: usize,
    pub datasets: u64,
    pub violations: u64,
    /// Largest `lhs - rhs` (or `|lhs - rhs|` for U-statistics).
    pub worst_residual: f64,
    pub passed: bool,
}

/// Dyadic reference law with full support.
fn reference(k: usize) -> Vec<f64> {
    match k {
        2 => vec![0.25, 0.75],
        _ => vec![0.25, 0.25, 0.5],
    }
}

struct Functional {
    kind: LooKind,
    p: Vec<f64>,
    support: Vec<f64>,
    kernel: KernelSpec,
    cost: CostSpec,
}

impl Functional {
    fn new(kind: LooKind, k: usize) -> Result<Self> {
        let support: Vec<f64> = (0..k).map(|j| j as f64).collect();
        let cost = CostSpec::matrix(
            (0..k).map(|i| (0..k).map(|j| (i as f64 - j as f64).powi(2)).collect()).collect(),
        )?;
        Ok(Self { kind, p: reference(k), support, kernel: KernelSpec::linear(((k - 1) * (k - 1)) as f64), cost })
    }

    /// Value at the empirical measure with the given counts.
    fn eval(&self, counts: &[u64]) -> Result<f64> {
        let t: u64 = counts.iter().sum();
        let q: Vec<f64> = counts.iter().map(|&c| c as f64 / t as f64).collect();
        Ok(match self.kind {
            LooKind::Tv => tv_probs(&q, &self.p),
            LooKind::Kl => kl_probs(&q, &self.p)?,
            LooKind::Ks => ks_probs(&q, &self.p),
            LooKind::W1 => w1_probs(&q, &self.p, &self.support),
            LooKind::MmdLinear => {
                let pts = EmpiricalSample::from_scalars(self.support.clone());
                mmd_v_weighted(&pts, &q, &pts, &self.p, &self.kernel)?
            }
            LooKind::Ot => ot_cost_discrete(&q, &self.p, &self.cost)?,
            LooKind::UStatistic => {
                // h(a, b) = (a - b)^2 / 2 + a b
                let h = |a: f64, b: f64| 0.5 * (a - b) * (a - b) + a * b;
                let mut s = 0.0;
                for (i, &ci) in counts.iter().enumerate() {
                    for (j, &cj) in counts.iter().enumerate() {
                        let pairs = if i == j { ci * ci.saturating_sub(1) } else { ci * cj };
                        s += pairs as f64 * h(self.support[i], self.support[j]);
                    }
                }
                s / (t * (t - 1)) as f64
            }
        })
    }
}

pub fn leave_one_out_audit(kind: LooKind, alphabet_size: usize, t_max: usize) -> Result<LooReport> {
    if !(2..=3).contains(&alphabet_size) {
        return Err(Error::InvalidArgument("alphabet size must be 2 or 3".into()));
    }
    if t_max == 0 || t_max > 5 {
        return Err(Error::InvalidArgument("t_max must lie in 1..=5".into()));
    }
    let f = Functional::new(kind, alphabet_size)?;
    let t_min = if kind == LooKind::UStatistic { 2 } else { 1 };
    let (mut datasets, mut violations, mut worst) = (0u64, 0u64, f64::NEG_INFINITY);
    for t in t_min..=t_max {
        let n = t + 1;
        let total = alphabet_size.pow(n as u32);
        for code in 0..total {
            let mut seq = Vec::with_capacity(n);
            let mut c = code;
            for _ in 0..n {
                seq.push(c % alphabet_size);
                c /= alphabet_size;
            }
            let mut counts = vec![0u64; alphabet_size];
            for &x in &seq {
                counts[x] += 1;
            }
            let lhs = f.eval(&counts)?;
            let mut rhs = 0.0;
            for &x in &seq {
                counts[x] -= 1;
                rhs += f.eval(&counts)?;
                counts[x] += 1;
            }
            rhs /= n as f64;
            let residual = if kind == LooKind::UStatistic { (lhs - rhs).abs() } else { lhs - rhs };
            worst = worst.max(residual);
            if residual > TOLERANCE {
                violations += 1;
            }
            datasets += 1;
        }
    }
    Ok(LooReport {
        kind,
        alphabet_size,
        t_max,
        datasets,
        violations,
        worst_residual: worst,
        passed: violations == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_kind_passes() {
        for kind in LooKind::ALL {
            for k in [2, 3] {
                let r = leave_one_out_audit(kind, k, 5).unwrap();
                assert!(r.passed, "{r:?}");
                assert!(r.worst_residual <= TOLERANCE);
            }
        }
    }

    #[test]
    fn convexity_is_strict_somewhere() {
        let r = leave_one_out_audit(LooKind::Tv, 2, 5).unwrap();
        assert!(r.worst_residual <= 1e-15);
        assert_eq!(r.datasets, 4 + 8 + 16 + 32 + 64);
    }

    #[test]
    fn a_concave_functional_would_fail() {
        // negative TV is concave; the audit logic must flag it
        let f = Functional::new(LooKind::Tv, 2).unwrap();
        let counts = [1u64, 1];
        let lhs = -f.eval(&counts).unwrap();
        let rhs = -(f.eval(&[0, 1]).unwrap() + f.eval(&[1, 0]).unwrap()) / 2.0;
        assert!(lhs - rhs > TOLERANCE);
    }

    #[test]
    fn rejects_large_inputs() {
        assert!(leave_one_out_audit(LooKind::Tv, 4, 3).is_err());
        assert!(leave_one_out_audit(LooKind::Tv, 2, 6).is_err());
    }
}
