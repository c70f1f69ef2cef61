//! Fast invariant suite, run by `confseq selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::loo::{leave_one_out_audit, LooKind};
use crate::bounds::cgf::TabulatedCgf;
use crate::bounds::{zeta, CgfEnvelope, StitchingFunctions};
use crate::confseq::dkw_boundary;
use crate::error::Result;
use crate::estimators::multinomial::ln_g_k_t_exact;
use crate::estimators::ot::ot_solve;
use crate::estimators::wasserstein::w1_sorted;
use crate::estimators::{g_k_t_enumerate, mmd_v, EmpiricalSample, KernelSpec};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SelftestOptions {
    /// Replaces `zeta(alpha)` by a wrong value to exercise the failure path.
    pub corrupt_zeta: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
    pub passed: bool,
    pub first_failure: Option<&'static str>,
}

fn stitching_sum(opts: SelftestOptions) -> (bool, String) {
    let mut worst = 0.0f64;
    let mut ok = true;
    for alpha in [1.5, 2.0, 3.0] {
        let st = if opts.corrupt_zeta {
            StitchingFunctions::with_zeta(alpha, 2.0, 2.0, 0.9 * zeta(alpha), zeta(alpha + 1.0))
        } else {
            StitchingFunctions::with_alpha(alpha).expect("valid alpha")
        };
        for r in [st.ell_budget(100_000), st.g_budget(100_000)] {
            ok &= r.holds;
            worst = worst.max(r.total_upper);
        }
    }
    (ok, format!("largest budget {worst:.12}"))
}

fn zeta_values() -> (bool, String) {
    let err = (zeta(2.0) - std::f64::consts::PI.powi(2) / 6.0).abs();
    (err < 1e-15, format!("|zeta(2) - pi^2/6| = {err:e}"))
}

fn dual_round_trip() -> Result<(bool, String)> {
    let envs = [
        CgfEnvelope::sub_gaussian(0.3, 2.0),
        CgfEnvelope::sub_exponential(0.1, 1.0, 0.5),
        CgfEnvelope::Tabulated(TabulatedCgf::from_fn(|l| l * l / 2.0, 1e3)?),
    ];
    let mut worst = 0.0f64;
    for env in &envs {
        for y in [0.01, 0.5, 3.0, 20.0] {
            let x = env.dual_inverse(y)?;
            worst = worst.max((env.legendre_dual(x) - y).abs() / y);
        }
    }
    Ok((worst < 1e-6, format!("worst relative error {worst:e}")))
}

fn mmd_oracle(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let k = KernelSpec::gaussian(0.7)?;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x: Vec<f64> = (0..rng.random_range(1..15)).map(|_| rng.random()).collect();
        let y: Vec<f64> = (0..rng.random_range(1..15)).map(|_| rng.random()).collect();
        let kk = |a: f64, b: f64| k.eval(&[a], &[b]);
        let mean = |u: &[f64], v: &[f64]| {
            u.iter().map(|&a| v.iter().map(|&b| kk(a, b)).sum::<f64>()).sum::<f64>() / (u.len() * v.len()) as f64
        };
        let naive = (mean(&x, &x) + mean(&y, &y) - 2.0 * mean(&x, &y)).max(0.0).sqrt();
        let fast = mmd_v(&EmpiricalSample::from_scalars(x), &EmpiricalSample::from_scalars(y), &k)?;
        worst = worst.max((naive - fast).abs());
    }
    Ok((worst <= 1e-12, format!("worst gap {worst:e}")))
}

fn ot_oracle(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let perms: Vec<[usize; 4]> = (0..256usize)
        .map(|c| [c % 4, c / 4 % 4, c / 16 % 4, c / 64])
        .filter(|p| (0..4).all(|v| p.contains(&v)))
        .collect();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let c: Vec<Vec<f64>> = (0..4).map(|_| (0..4).map(|_| rng.random::<f64>()).collect()).collect();
        let w = [0.25; 4];
        let brute = perms
            .iter()
            .map(|p| p.iter().enumerate().map(|(i, &j)| c[i][j]).sum::<f64>() / 4.0)
            .fold(f64::INFINITY, f64::min);
        worst = worst.max((ot_solve(&w, &w, &c)?.cost - brute).abs());
    }
    Ok((worst <= 1e-9, format!("worst gap {worst:e}")))
}

fn g_enumeration() -> Result<(bool, String)> {
    let p = [0.2, 0.3, 0.5];
    let mut worst = 0.0f64;
    for n in 1..=5u64 {
        for i in 0..=10 {
            let lam = i as f64 / 10.0;
            let dp = ln_g_k_t_exact(lam, &p, n)?.exp();
            let en = g_k_t_enumerate(lam, &p, n);
            worst = worst.max((dp - en).abs() / en);
        }
    }
    Ok((worst <= 1e-12, format!("worst relative gap {worst:e}")))
}

fn w1_oracle(rng: &mut ChaCha8Rng) -> (bool, String) {
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.random_range(1..20);
        let mut x: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let mut y: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        let pairing = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum::<f64>() / n as f64;
        worst = worst.max((w1_sorted(&x, &y) - pairing).abs());
    }
    (worst <= 1e-12, format!("worst gap {worst:e}"))
}

fn leave_one_out() -> Result<(bool, String)> {
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for kind in [LooKind::Tv, LooKind::Kl, LooKind::Ks, LooKind::W1] {
        let r = leave_one_out_audit(kind, 2, 5)?;
        ok &= r.passed;
        worst = worst.max(r.worst_residual);
    }
    Ok((ok, format!("worst residual {worst:e}")))
}

fn radius_values() -> Result<(bool, String)> {
    let v = dkw_boundary(1, 0.05, &StitchingFunctions::default())?;
    let err = (v - 7.058_989_636_105_30).abs();
    Ok((err < 1e-12, format!("DKW radius at t = 1: {v:.12}")))
}

pub fn selftest(opts: SelftestOptions) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let lift = |r: Result<(bool, String)>| r.unwrap_or_else(|e| (false, format!("error: {e}")));
    let mut checks = Vec::new();
    let mut push = |name: &'static str, (passed, detail): (bool, String)| checks.push(Check { name, passed, detail });
    push("stitching-sum", stitching_sum(opts));
    push("zeta-values", zeta_values());
    push("dual-round-trip", lift(dual_round_trip()));
    push("mmd-oracle", lift(mmd_oracle(&mut rng)));
    push("ot-oracle", lift(ot_oracle(&mut rng)));
    push("g-enumeration", lift(g_enumeration()));
    push("w1-oracle", w1_oracle(&mut rng));
    push("leave-one-out", lift(leave_one_out()));
    push("radius-values", lift(radius_values()));
    let first_failure = checks.iter().find(|c| !c.passed).map(|c| c.name);
    SelftestReport { passed: first_failure.is_none(), checks, first_failure }
}
