//! Closed-form confidence radii for the supported divergences.
//!
//! Throughout, `c1(t) = log l(log2 t) + log(1/delta)` and
//! `c2(t, s) = log g(log2 t + log2 s) + log(2/delta)`.

use std::f64::consts::PI;

use super::config::{BiasBound, Covering, LambdaSchedule, Mode};
use crate::bounds::radius::check_delta;
use crate::bounds::{subgaussian_radius, CgfEnvelope, StitchingFunctions};
use crate::error::{Error, Result};
use crate::estimators::ln_g_k_t;

/// Lower radius `gamma` and upper offset `kappa` of a two-sample band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radii {
    pub gamma: f64,
    pub kappa: f64,
}

fn check_t(t: u64) -> Result<()> {
    if t == 0 {
        Err(Error::InvalidArgument("t must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn c1(st: &StitchingFunctions, t: u64, delta: f64) -> f64 {
    st.crossing_log2(t, delta)
}

fn c2(st: &StitchingFunctions, t: u64, s: u64, delta: f64) -> f64 {
    st.crossing2_log2(t, s, delta / 2.0)
}

/// `B sqrt((log l(log2 t) + log(4/delta)) / t)`
pub fn kappa_upper(t: u64, delta: f64, st: &StitchingFunctions, b_range: f64) -> Result<f64> {
    check_t(t)?;
    check_delta(delta)?;
    if !(b_range >= 0.0) {
        return Err(Error::InvalidArgument("range bound must be nonnegative".into()));
    }
    Ok(b_range * (c1(st, t, delta / 4.0) / t as f64).sqrt())
}

/// `kappa_t + kappa_s`
pub fn kappa_two_sample(t: u64, s: u64, delta: f64, st: &StitchingFunctions, b_range: f64) -> Result<f64> {
    Ok(kappa_upper(t, delta, st, b_range)? + kappa_upper(s, delta, st, b_range)?)
}

/// `sqrt(pi/t) + 2 sqrt((2/t) c1)`
pub fn dkw_boundary(t: u64, delta: f64, st: &StitchingFunctions) -> Result<f64> {
    check_t(t)?;
    check_delta(delta)?;
    let tf = t as f64;
    Ok((PI / tf).sqrt() + 2.0 * (2.0 / tf * c1(st, t, delta)).sqrt())
}

pub fn ks_two_sample_boundary(t: u64, s: u64, delta: f64, st: &StitchingFunctions, mode: Mode) -> Result<Radii> {
    check_t(t)?;
    check_t(s)?;
    check_delta(delta)?;
    let (tf, sf) = (t as f64, s as f64);
    let mean = (PI / tf).sqrt() + (PI / sf).sqrt();
    let c = c2(st, t, s, delta);
    let gamma = match mode {
        Mode::AsStated => mean + 2.0 * (2.0 * tf * sf / (tf + sf) * c).sqrt(),
        Mode::DerivationConsistent => {
            let (tb, sb) = (st.t_bar(t) as f64, st.s_bar(s) as f64);
            subgaussian_radius(mean, 2.0 * (tb + sb) / (tb * sb), c)
        }
    };
    Ok(Radii { gamma, kappa: kappa_two_sample(t, s, delta, st, 1.0)? })
}

pub fn mmd_boundary(t: u64, s: u64, delta: f64, st: &StitchingFunctions, b: f64, mode: Mode) -> Result<Radii> {
    check_t(t)?;
    check_t(s)?;
    check_delta(delta)?;
    if !(b > 0.0) {
        return Err(Error::InvalidArgument("kernel bound must be positive".into()));
    }
    let (tf, sf) = (t as f64, s as f64);
    let c = c2(st, t, s, delta);
    let gamma = match mode {
        Mode::AsStated => {
            2.0 * (2.0 * b).sqrt() * (tf.powf(-0.5) + sf.powf(-0.5)) + 4.0 * (b * (tf + sf) / (tf * sf) * c).sqrt()
        }
        Mode::DerivationConsistent => {
            let (tb, sb) = (st.t_bar(t) as f64, st.s_bar(s) as f64);
            let mean = 2.0 * ((b / tb).sqrt() + (b / sb).sqrt());
            subgaussian_radius(mean, 8.0 * b * (tb + sb) / (tb * sb), c)
        }
    };
    Ok(Radii { gamma, kappa: 2.0 * b.sqrt() * kappa_two_sample(t, s, delta, st, 1.0)? })
}

/// Paired U-statistic radius `16 B sqrt(c1 / (t - 1))`, for `MMD_U^2`.
pub fn mmd_u_boundary(t: u64, delta: f64, st: &StitchingFunctions, b: f64) -> Result<f64> {
    if t < 2 {
        return Err(Error::InsufficientData { needed: 2, got: t as usize });
    }
    check_delta(delta)?;
    Ok(16.0 * b * (c1(st, t, delta) / (t - 1) as f64).sqrt())
}

pub fn ot_boundary(
    t: u64,
    s: u64,
    delta: f64,
    st: &StitchingFunctions,
    cost_bound: f64,
    bias: &BiasBound,
    mode: Mode,
) -> Result<Radii> {
    check_t(t)?;
    check_t(s)?;
    check_delta(delta)?;
    if !(cost_bound > 0.0) {
        return Err(Error::InvalidArgument("cost bound must be positive".into()));
    }
    let (tb, sb) = (st.t_bar(t), st.s_bar(s));
    let alpha = bias.eval(tb, sb);
    let c = c2(st, t, s, delta);
    let inner = match mode {
        Mode::AsStated => {
            let (tf, sf) = (t as f64, s as f64);
            tf * sf / (tf + sf)
        }
        Mode::DerivationConsistent => {
            let (tb, sb) = (tb as f64, sb as f64);
            (tb + sb) / (tb * sb)
        }
    };
    Ok(Radii {
        gamma: alpha + 2.0 * cost_bound * (inner * c).sqrt(),
        kappa: kappa_two_sample(t, s, delta, st, cost_bound)?,
    })
}

fn kl_gamma(t: u64, delta: f64, st: &StitchingFunctions, p: &[f64], lambda: f64, factor: u8) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidArgument(format!("lambda must lie in (0, 1], got {lambda}")));
    }
    let ln_g = ln_g_k_t(lambda, p, t / 2)?;
    let log_term = ln_g + st.log_ell((t as f64).log2()) - delta.ln();
    Ok(factor as f64 / (lambda * t as f64) * log_term)
}

/// Finite-alphabet KL radius `(f / (lambda_t t)) log(G_{k, floor(t/2)}(lambda_t) l(log2 t) / delta)`,
/// with the decreasing-radius hypothesis checked on `1..=t`.
pub fn kl_finite_boundary(
    t: u64,
    delta: f64,
    st: &StitchingFunctions,
    p: &[f64],
    schedule: LambdaSchedule,
    factor: u8,
) -> Result<f64> {
    let b = KlBoundary::new(p, delta, *st, schedule, factor, t)?;
    Ok(b.gamma_at(t))
}

/// Precomputed KL radii, verified nonincreasing up to `horizon`.
#[derive(Debug, Clone)]
pub struct KlBoundary {
    p: Vec<f64>,
    delta: f64,
    stitching: StitchingFunctions,
    schedule: LambdaSchedule,
    factor: u8,
    gammas: Vec<f64>,
}

impl KlBoundary {
    pub fn new(
        p: &[f64],
        delta: f64,
        stitching: StitchingFunctions,
        schedule: LambdaSchedule,
        factor: u8,
        horizon: u64,
    ) -> Result<Self> {
        check_t(horizon)?;
        check_delta(delta)?;
        if factor != 1 && factor != 2 {
            return Err(Error::InvalidArgument("factor must be 1 or 2".into()));
        }
        let mut b = Self { p: p.to_vec(), delta, stitching, schedule, factor, gammas: Vec::new() };
        b.extend_to(horizon)?;
        Ok(b)
    }

    pub fn horizon(&self) -> u64 {
        self.gammas.len() as u64
    }

    /// Extends the table, failing with the first `t` where `gamma_{t+1} > gamma_t`.
    pub fn extend_to(&mut self, horizon: u64) -> Result<()> {
        let k = self.p.len();
        while self.horizon() < horizon {
            let t = self.horizon() + 1;
            let g = kl_gamma(t, self.delta, &self.stitching, &self.p, self.schedule.at(t, k), self.factor)?;
            if let Some(&prev) = self.gammas.last() {
                if g > prev + 1e-12 * prev.abs() {
                    return Err(Error::MonotonicityViolated(t - 1));
                }
            }
            self.gammas.push(g);
        }
        Ok(())
    }

    /// Radius at `t <= horizon`.
    pub fn gamma_at(&self, t: u64) -> f64 {
        self.gammas[t as usize - 1]
    }

    /// Radius at any `t`, growing the table geometrically when needed.
    pub fn gamma(&mut self, t: u64) -> Result<f64> {
        check_t(t)?;
        if t > self.horizon() {
            self.extend_to(t.max(2 * self.horizon()))?;
        }
        Ok(self.gamma_at(t))
    }
}

/// Finite-alphabet TV radius.
///
/// `AsStated`: `(1/2) sqrt(k/(2t)) + sqrt((2/t) c1)`.
/// `DerivationConsistent`: `sqrt(k/tb)/4 + sqrt(c1/tb)` with `tb = ceil(t/2)`; equal at even `t`.
pub fn tv_finite_boundary(t: u64, delta: f64, st: &StitchingFunctions, k: usize, mode: Mode) -> Result<f64> {
    check_t(t)?;
    check_delta(delta)?;
    if k < 2 {
        return Err(Error::InvalidArgument("alphabet needs k >= 2".into()));
    }
    let c = c1(st, t, delta);
    let kf = k as f64;
    Ok(match mode {
        Mode::AsStated => {
            let tf = t as f64;
            0.5 * (kf / (2.0 * tf)).sqrt() + (2.0 / tf * c).sqrt()
        }
        Mode::DerivationConsistent => {
            let tb = t.div_ceil(2) as f64;
            0.25 * (kf / tb).sqrt() + (c / tb).sqrt()
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothedTarget {
    Tv,
    W1,
}

/// `(c_d, C_d)` for a `tau^2`-sub-Gaussian law smoothed at scale `sigma`.
pub fn smoothed_constants(d: usize, sigma: f64, tau2: f64) -> (f64, f64) {
    let df = d as f64;
    let base = std::f64::consts::FRAC_1_SQRT_2 + tau2.sqrt() / sigma;
    let c = std::f64::consts::SQRT_2 * base.powf(df / 2.0) * (3.0 * df / 16.0).exp();
    let cap = 2.0 * (df * sigma * sigma).sqrt() * base * c;
    (c, cap)
}

pub fn smoothed_boundary(
    t: u64,
    delta: f64,
    st: &StitchingFunctions,
    d: usize,
    sigma: f64,
    tau2: f64,
    which: SmoothedTarget,
) -> Result<f64> {
    check_t(t)?;
    check_delta(delta)?;
    if !(sigma > 0.0) || !(tau2 > 0.0) || d == 0 {
        return Err(Error::InvalidArgument("need sigma > 0, tau2 > 0, d >= 1".into()));
    }
    let (c, cap) = smoothed_constants(d, sigma, tau2);
    let tf = t as f64;
    let cr = c1(st, t, delta);
    Ok(match which {
        SmoothedTarget::Tv => c / tf.sqrt() + 4.0 * (2.0 / tf * cr).sqrt(),
        SmoothedTarget::W1 => cap / tf.sqrt() + 2.0 * (tau2 / tf * cr).sqrt(),
    })
}

/// Two-sided radius for the smoothed entropy; data are assumed to live in `[-1, 1]^d`.
pub fn entropy_bound(t: u64, delta: f64, st: &StitchingFunctions, d: usize, sigma: f64, cap: f64) -> Result<f64> {
    check_t(t)?;
    check_delta(delta)?;
    if !(sigma > 0.0) || d == 0 {
        return Err(Error::InvalidArgument("need sigma > 0, d >= 1".into()));
    }
    let (tf, df, s2) = (t as f64, d as f64, sigma * sigma);
    Ok(3.0 * df.sqrt() / s2 * (c1(st, t, delta / 4.0) / tf).sqrt() + df.sqrt() * cap / (tf.sqrt() * s2))
}

/// Index at which the population complexity enters: `max(1, floor(t/2))`.
pub fn rademacher_index(t: u64) -> u64 {
    (t / 2).max(1)
}

/// Uniform deviation bound `R_{tb} + 2 sqrt((2/t) c1)`.
pub fn rademacher_bound<F: Fn(u64) -> f64>(t: u64, delta: f64, st: &StitchingFunctions, pop_complexity: F) -> Result<f64> {
    check_t(t)?;
    check_delta(delta)?;
    Ok(pop_complexity(rademacher_index(t)) + 2.0 * (2.0 / t as f64 * c1(st, t, delta)).sqrt())
}

/// Lower confidence bound on `R_{tb}` from the empirical complexity.
pub fn rademacher_lower(t: u64, delta: f64, st: &StitchingFunctions, empirical: f64) -> Result<f64> {
    check_t(t)?;
    check_delta(delta)?;
    Ok(empirical - 2.0 * (2.0 / t as f64 * c1(st, t, delta)).sqrt())
}

/// Norm-ball radius for the mean: `(psi*)^{-1}((c1 + log N) / (t/2)) / (1 - gamma)`.
pub fn mean_boundary(t: u64, delta: f64, st: &StitchingFunctions, envelope: &CgfEnvelope, covering: Covering) -> Result<f64> {
    check_t(t)?;
    check_delta(delta)?;
    let g = covering.gamma();
    if !(0.0..1.0).contains(&g) {
        return Err(Error::InvalidArgument("covering gamma must lie in [0, 1)".into()));
    }
    let y = (c1(st, t, delta) + covering.log_n()) / (t as f64 / 2.0);
    Ok(envelope.dual_inverse(y)? / (1.0 - g))
}

/// `(t, s) -> gamma_x(t) + gamma_y(s)`
pub fn triangle_compose<'a, A, B>(gamma_x: A, gamma_y: B) -> impl Fn(u64, u64) -> f64 + 'a
where
    A: Fn(u64) -> f64 + 'a,
    B: Fn(u64) -> f64 + 'a,
{
    move |t, s| gamma_x(t) + gamma_y(s)
}
