//! Crossing radii for reverse submartingales.
//!
//! For a family of CGF envelopes `psi_t`, the one-sample boundary is
//!
//! ```text
//! gamma_t  = (psi*_{tb})^{-1}( log l(log_eta t) + log(1/delta) ),        tb = ceil(t / ceil(eta))
//! gamma_ts = (psi*_{tb,sb})^{-1}( log g(log_eta t + log_xi s) + log(1/delta) )
//! ```
//!
//! and `P(exists t: D_t >= gamma_t) <= delta` whenever `gamma_t` is nonincreasing.

use super::cgf::CgfEnvelope;
use super::stitching::StitchingFunctions;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusRequest {
    pub t: u64,
    pub s: Option<u64>,
    pub delta_side: f64,
    pub stitching: StitchingFunctions,
}

impl RadiusRequest {
    pub fn one_sample(t: u64, delta_side: f64, stitching: StitchingFunctions) -> Result<Self> {
        let r = Self { t, s: None, delta_side, stitching };
        r.validate()?;
        Ok(r)
    }

    pub fn two_sample(t: u64, s: u64, delta_side: f64, stitching: StitchingFunctions) -> Result<Self> {
        let r = Self { t, s: Some(s), delta_side, stitching };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        check_delta(self.delta_side)?;
        if self.t == 0 || self.s == Some(0) {
            return Err(Error::InvalidArgument("sample sizes must be at least 1".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")))
    }
}

pub fn one_sample_radius<F>(family: F, req: &RadiusRequest) -> Result<f64>
where
    F: Fn(u64) -> CgfEnvelope,
{
    req.validate()?;
    let st = &req.stitching;
    let y = st.one_sample_crossing(req.t, req.delta_side).max(0.0);
    family(st.t_bar(req.t)).dual_inverse(y)
}

pub fn two_sample_radius<F>(family: F, req: &RadiusRequest) -> Result<f64>
where
    F: Fn(u64, u64) -> CgfEnvelope,
{
    req.validate()?;
    let s = req.s.ok_or(Error::MissingSecondIndex)?;
    let st = &req.stitching;
    let y = st.two_sample_crossing(req.t, s, req.delta_side).max(0.0);
    family(st.t_bar(req.t), st.s_bar(s)).dual_inverse(y)
}

/// `mean_bound + sqrt(2 variance_proxy crossing_log)`
pub fn subgaussian_radius(mean_bound: f64, variance_proxy: f64, crossing_log: f64) -> f64 {
    mean_bound + (2.0 * variance_proxy.max(0.0) * crossing_log.max(0.0)).sqrt()
}

/// `exp(-psi*(u))`, times `e` for two-sample processes, clipped to 1.
pub fn maximal_tail_bound(envelope: &CgfEnvelope, u: f64, two_sample: bool) -> f64 {
    let base = (-envelope.legendre_dual(u)).exp();
    let b = if two_sample { std::f64::consts::E * base } else { base };
    b.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Monotonicity {
    pub holds: bool,
    pub first_violation: Option<u64>,
}

/// Scans `t = 1..t_max` for `gamma_{t+1} > gamma_t` beyond a relative `1e-12`.
pub fn monotonicity_check<F>(mut radius_fn: F, t_max: u64) -> Monotonicity
where
    F: FnMut(u64) -> f64,
{
    let mut prev = radius_fn(1);
    for t in 1..t_max {
        let next = radius_fn(t + 1);
        if next > prev + 1e-12 * prev.abs() || next.is_nan() {
            return Monotonicity { holds: false, first_violation: Some(t) };
        }
        prev = next;
    }
    Monotonicity { holds: true, first_violation: None }
}

/// Paired-sample radius: `family(t)` is the envelope of the `(t, t)` process.
pub fn paired_radius<F>(family: F, t: u64, delta: f64, stitching: &StitchingFunctions) -> Result<f64>
where
    F: Fn(u64) -> CgfEnvelope,
{
    let req = RadiusRequest::one_sample(t, delta, *stitching)?;
    one_sample_radius(family, &req)
}

/// Forward-submartingale comparison boundary `2 gamma_t` on the `S_t = t D_t` scale.
///
/// Epoch `k >= 0` gets budget `delta / (2 l(k+1))`, which sums to `delta / 2`.
pub fn forward_boundary<F>(family: F, t: u64, delta: f64, stitching: &StitchingFunctions) -> Result<f64>
where
    F: Fn(u64) -> CgfEnvelope,
{
    check_delta(delta)?;
    if t == 0 {
        return Err(Error::InvalidArgument("t must be at least 1".into()));
    }
    let gamma = |u: u64| -> Result<f64> {
        let y = stitching.log_ell((u as f64).log2() + 1.0) + (2.0 / delta).ln();
        family(u).dual_inverse(y)
    };
    let mut prev = gamma(1)?;
    for u in 2..=t {
        let next = gamma(u)?;
        if next < prev - 1e-12 * prev.abs() {
            return Err(Error::MonotonicityViolated(u - 1));
        }
        prev = next;
    }
    Ok(2.0 * prev)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_family(t: u64) -> CgfEnvelope {
        CgfEnvelope::sub_gaussian(0.0, 1.0 / t as f64)
    }

    #[test]
    fn one_sample_at_t1() {
        let st = StitchingFunctions::default();
        let req = RadiusRequest::one_sample(1, 0.05, st).unwrap();
        let r = one_sample_radius(unit_family, &req).unwrap();
        assert!((r - 2.643_267_892_599_891_7).abs() < 1e-12);
    }

    #[test]
    fn one_sample_quarter_ratio() {
        let st = StitchingFunctions::default();
        for t in (64..5000).step_by(37) {
            let a = one_sample_radius(unit_family, &RadiusRequest::one_sample(t, 0.05, st).unwrap()).unwrap();
            let b = one_sample_radius(unit_family, &RadiusRequest::one_sample(4 * t, 0.05, st).unwrap()).unwrap();
            let q = b / a;
            assert!(q > 0.45 && q < 0.55, "{t} {q}");
        }
    }

    #[test]
    fn degenerate_family_is_constant() {
        let st = StitchingFunctions::default();
        for t in [1, 2, 17, 1000] {
            let req = RadiusRequest::one_sample(t, 0.05, st).unwrap();
            assert_eq!(one_sample_radius(|_| CgfEnvelope::sub_gaussian(0.25, 0.0), &req).unwrap(), 0.25);
            assert_eq!(paired_radius(|_| CgfEnvelope::sub_gaussian(0.25, 0.0), t, 0.05, &st).unwrap(), 0.25);
        }
    }

    #[test]
    fn two_sample_small() {
        // halved indices tb = sb = 1 give kappa2 = 2
        let st = StitchingFunctions::default();
        let fam = |t: u64, s: u64| CgfEnvelope::sub_gaussian(0.0, 1.0 / t as f64 + 1.0 / s as f64);
        let req = RadiusRequest::two_sample(2, 2, 0.025, st).unwrap();
        let r = two_sample_radius(fam, &req).unwrap();
        assert!((r - 4.880_105_804_400_91).abs() < 1e-12);
        let a = two_sample_radius(fam, &RadiusRequest::two_sample(30, 7, 0.05, st).unwrap()).unwrap();
        let b = two_sample_radius(fam, &RadiusRequest::two_sample(7, 30, 0.05, st).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-12);
        let zero = two_sample_radius(|_, _| CgfEnvelope::sub_gaussian(0.0, 0.0), &req).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn missing_second_index() {
        let st = StitchingFunctions::default();
        let req = RadiusRequest::one_sample(2, 0.05, st).unwrap();
        assert_eq!(
            two_sample_radius(|_, _| CgfEnvelope::sub_gaussian(0.0, 1.0), &req),
            Err(Error::MissingSecondIndex)
        );
    }

    #[test]
    fn subgaussian_radius_examples() {
        assert_eq!(subgaussian_radius(0.0, 1.0, 2.0), 2.0);
        assert_eq!(subgaussian_radius(0.5, 0.0, 7.0), 0.5);
        assert_eq!(subgaussian_radius(0.5, 1.0, -3.0), 0.5);
        let st = StitchingFunctions::default();
        let r = subgaussian_radius((std::f64::consts::PI / 512.0).sqrt(), 2.0 / 512.0, st.crossing_log2(1024, 0.05));
        assert!((r - 0.329_868_083_454_648).abs() < 1e-12);
    }

    #[test]
    fn tail_bounds() {
        let e = CgfEnvelope::sub_gaussian(0.0, 1.0);
        let one = maximal_tail_bound(&e, 3.0, false);
        assert!((one - 0.011_108_996_538_242_306).abs() < 1e-15);
        let two = maximal_tail_bound(&e, 3.0, true);
        assert!((two - std::f64::consts::E * one).abs() < 1e-15);
        assert!(maximal_tail_bound(&e, 1e-9, false) > 1.0 - 1e-15);
        assert_eq!(maximal_tail_bound(&e, 0.1, true), 1.0);
    }

    #[test]
    fn monotonicity_examples() {
        let st = StitchingFunctions::default();
        let m = monotonicity_check(|t| subgaussian_radius(0.0, 1.0 / t as f64, st.crossing_log2(t, 0.05)), 1_000_000);
        assert!(m.holds);
        // the halved index stalls on odd-even pairs while the crossing log grows
        let m = monotonicity_check(
            |t| one_sample_radius(unit_family, &RadiusRequest::one_sample(t, 0.05, st).unwrap()).unwrap(),
            1000,
        );
        assert_eq!(m.first_violation, Some(3));
        assert!(monotonicity_check(|_| 3.0, 100).holds);
        let m = monotonicity_check(|t| t as f64, 100);
        assert_eq!(m, Monotonicity { holds: false, first_violation: Some(1) });
    }

    #[test]
    fn paired_beats_unpaired_mmd() {
        let st = StitchingFunctions::default();
        let b = 1.0;
        let two = |t: u64, s: u64| {
            let (tf, sf) = (t as f64, s as f64);
            CgfEnvelope::sub_gaussian(2.0 * ((b / tf).sqrt() + (b / sf).sqrt()), 8.0 * b * (tf + sf) / (tf * sf))
        };
        let paired = |t: u64| two(t, t);
        let p = paired_radius(paired, 100, 0.05, &st).unwrap();
        let u = two_sample_radius(two, &RadiusRequest::two_sample(100, 100, 0.05, st).unwrap()).unwrap();
        assert!(p < u, "{p} {u}");
        assert!(paired_radius(paired, 1, 0.05, &st).unwrap().is_finite());
    }

    #[test]
    fn forward_boundary_sum_scale() {
        let st = StitchingFunctions::default();
        let fam = |t: u64| CgfEnvelope::sub_gaussian(0.0, t as f64);
        let r = forward_boundary(fam, 4, 0.05, &st).unwrap();
        assert!((r - 14.292_716_280_870_786).abs() < 1e-11);
        let loose = forward_boundary(fam, 4, 0.999, &st).unwrap();
        assert!(loose < r);
        let shrinking = |t: u64| CgfEnvelope::sub_gaussian(0.0, 1.0 / t as f64);
        assert!(matches!(forward_boundary(shrinking, 10, 0.05, &st), Err(Error::MonotonicityViolated(_))));
    }

    #[test]
    fn budget_split_accounting() {
        // lower side delta/2 over epochs, upper side delta/2
        let st = StitchingFunctions::default();
        let delta = 0.05;
        let r = st.ell_budget(100_000);
        let lower = 0.5 * delta * r.total_upper;
        assert!(lower + 0.5 * delta <= delta * (1.0 + 1e-10));
    }

    #[test]
    fn rejects_bad_requests() {
        let st = StitchingFunctions::default();
        assert!(RadiusRequest::one_sample(0, 0.05, st).is_err());
        assert!(RadiusRequest::one_sample(1, 1.5, st).is_err());
        assert!(RadiusRequest::two_sample(1, 0, 0.05, st).is_err());
    }
}
