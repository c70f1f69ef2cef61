//! Stitching functions.
//!
//! ```text
//! l(k) = (1 v k)^a * zeta(a)                      sum_{k>=1} 1/l(k)      = 1
//! g(k) = e * (2 v k)^(a+1) * (zeta(a) - zeta(a+1))  sum_{j,k>=1} e/g(j+k) = 1
//! ```
//!
//! Time is cut into epochs `[eta^k, eta^(k+1))`; epoch `k` receives a share
//! `1/l(k)` of the crossing budget (or `e/g(j+k)` for a pair of epochs).

use crate::error::{Error, Result};

/// Bernoulli numbers B_2, B_4, ..., B_20.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Riemann zeta for real `s > 1`.
///
/// Partial sum to `N = 64` plus the Euler-Maclaurin remainder; the neglected
/// term is far below `1e-16` relative for every `s > 1`.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta needs s > 1");
    const N: usize = 64;
    let mut head = 0.0;
    for k in (1..N).rev() {
        head += (k as f64).powf(-s);
    }
    let n = N as f64;
    let mut tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // rising = s (s+1) ... (s+2j-2), fact = (2j)!
    let mut rising = s;
    let mut fact = 2.0;
    let mut npow = n.powf(-s - 1.0);
    for (j, b) in BERNOULLI.iter().enumerate() {
        tail += b / fact * rising * npow;
        let m = 2.0 * (j as f64 + 1.0);
        rising *= (s + m - 1.0) * (s + m);
        fact *= (m + 1.0) * (m + 2.0);
        npow /= n * n;
    }
    head + tail
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StitchingFunctions {
    pub alpha: f64,
    pub eta: f64,
    pub xi: f64,
    pub zeta_alpha: f64,
    pub zeta_alpha_plus_1: f64,
}

impl Default for StitchingFunctions {
    fn default() -> Self {
        Self::new(2.0, 2.0, 2.0).expect("defaults are valid")
    }
}

/// Outcome of a partial-sum budget check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetReport {
    pub terms: u64,
    pub partial: f64,
    pub tail_upper: f64,
    pub tail_lower: f64,
    pub total_upper: f64,
    pub holds: bool,
}

impl StitchingFunctions {
    pub fn new(alpha: f64, eta: f64, xi: f64) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("alpha must exceed 1, got {alpha}")));
        }
        if !(eta > 1.0) || !eta.is_finite() {
            return Err(Error::InvalidArgument(format!("eta must exceed 1, got {eta}")));
        }
        if !(xi > 1.0) || !xi.is_finite() {
            return Err(Error::InvalidArgument(format!("xi must exceed 1, got {xi}")));
        }
        Ok(Self {
            alpha,
            eta,
            xi,
            zeta_alpha: zeta(alpha),
            zeta_alpha_plus_1: zeta(alpha + 1.0),
        })
    }

    pub fn with_alpha(alpha: f64) -> Result<Self> {
        Self::new(alpha, 2.0, 2.0)
    }

    /// Builds the pair with caller-supplied zeta values. Only useful for
    /// fault injection: anything but the true values breaks the budget.
    pub fn with_zeta(alpha: f64, eta: f64, xi: f64, zeta_alpha: f64, zeta_alpha_plus_1: f64) -> Self {
        Self { alpha, eta, xi, zeta_alpha, zeta_alpha_plus_1 }
    }

    pub fn ell(&self, k: f64) -> f64 {
        k.max(1.0).powf(self.alpha) * self.zeta_alpha
    }

    pub fn log_ell(&self, k: f64) -> f64 {
        self.alpha * k.max(1.0).ln() + self.zeta_alpha.ln()
    }

    pub fn g(&self, k: f64) -> f64 {
        std::f64::consts::E * k.max(2.0).powf(self.alpha + 1.0) * (self.zeta_alpha - self.zeta_alpha_plus_1)
    }

    pub fn log_g(&self, k: f64) -> f64 {
        1.0 + (self.alpha + 1.0) * k.max(2.0).ln() + (self.zeta_alpha - self.zeta_alpha_plus_1).ln()
    }

    pub fn log_eta(&self, t: u64) -> f64 {
        (t as f64).ln() / self.eta.ln()
    }

    pub fn log_xi(&self, s: u64) -> f64 {
        (s as f64).ln() / self.xi.ln()
    }

    /// `ceil(t / ceil(eta))`
    pub fn t_bar(&self, t: u64) -> u64 {
        t.div_ceil(self.eta.ceil() as u64)
    }

    /// `ceil(s / ceil(xi))`
    pub fn s_bar(&self, s: u64) -> u64 {
        s.div_ceil(self.xi.ceil() as u64)
    }

    /// `log l(log_eta t) + log(1/delta)`
    pub fn one_sample_crossing(&self, t: u64, delta_side: f64) -> f64 {
        self.log_ell(self.log_eta(t)) - delta_side.ln()
    }

    /// `log g(log_eta t + log_xi s) + log(1/delta)`
    pub fn two_sample_crossing(&self, t: u64, s: u64, delta_side: f64) -> f64 {
        self.log_g(self.log_eta(t) + self.log_xi(s)) - delta_side.ln()
    }

    /// `log l(log2 t) + log(1/delta)`, the form used by the closed-form corollaries.
    pub fn crossing_log2(&self, t: u64, delta_side: f64) -> f64 {
        self.log_ell((t as f64).log2()) - delta_side.ln()
    }

    /// `log g(log2 t + log2 s) + log(1/delta)`
    pub fn crossing2_log2(&self, t: u64, s: u64, delta_side: f64) -> f64 {
        self.log_g((t as f64).log2() + (s as f64).log2()) - delta_side.ln()
    }

    /// Checks `sum_{k=1}^K 1/l(k) + tail <= 1`.
    ///
    /// `k^-a` is convex, so `sum_{k>K} k^-a <= int_{K+1/2}^inf x^-a dx`.
    pub fn ell_budget(&self, k_max: u64) -> BudgetReport {
        let a = self.alpha;
        let mut partial = 0.0;
        for k in (1..=k_max).rev() {
            partial += (k as f64).powf(-a);
        }
        let kf = k_max as f64;
        let upper = (kf + 0.5).powf(1.0 - a) / (a - 1.0);
        let lower = (kf + 1.0).powf(1.0 - a) / (a - 1.0);
        self.report(k_max, partial / self.zeta_alpha, upper / self.zeta_alpha, lower / self.zeta_alpha)
    }

    /// Checks `sum_{j+k<=K} e/g(j+k) + tail <= 1`, grouping pairs by `n = j+k`.
    ///
    /// For `n >= 3` the summand `(n-1) n^-(a+1)` is convex, so the same
    /// midpoint bound applies.
    pub fn g_budget(&self, k_max: u64) -> BudgetReport {
        let a = self.alpha;
        let d = self.zeta_alpha - self.zeta_alpha_plus_1;
        let mut partial = 0.0;
        for n in (2..=k_max.max(2)).rev() {
            let nf = n as f64;
            partial += (nf - 1.0) * nf.powf(-(a + 1.0));
        }
        let kf = k_max.max(2) as f64;
        let antideriv = |x: f64| x.powf(1.0 - a) / (a - 1.0) - x.powf(-a) / a;
        let upper = antideriv(kf + 0.5);
        let lower = antideriv(kf + 1.0);
        self.report(k_max, partial / d, upper / d, lower / d)
    }

    fn report(&self, terms: u64, partial: f64, tail_upper: f64, tail_lower: f64) -> BudgetReport {
        let total_upper = partial + tail_upper;
        BudgetReport {
            terms,
            partial,
            tail_upper,
            tail_lower,
            total_upper,
            holds: total_upper <= 1.0 + 1e-10,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zeta_known_values() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-15);
        assert!((zeta(3.0) - 1.202_056_903_159_594_3).abs() < 1e-15);
        assert!((zeta(1.5) - 2.612_375_348_685_488).abs() < 1e-14);
    }

    #[test]
    fn ell_and_g_floors() {
        let st = StitchingFunctions::default();
        assert_eq!(st.ell(0.0), st.ell(1.0));
        assert_eq!(st.ell(0.5), st.zeta_alpha);
        assert_eq!(st.g(0.0), st.g(2.0));
        assert!((st.g(2.0) - 9.630_919_570_354_327).abs() < 1e-12);
        assert!((st.log_ell(10.0) - 5.102_870_488_458_837).abs() < 1e-13);
    }

    #[test]
    fn epochs() {
        let st = StitchingFunctions::default();
        assert_eq!(st.t_bar(1), 1);
        assert_eq!(st.t_bar(2), 1);
        assert_eq!(st.t_bar(7), 4);
        let st3 = StitchingFunctions::new(2.0, 2.5, 2.0).unwrap();
        assert_eq!(st3.t_bar(7), 3);
    }

    #[test]
    fn budgets_hold() {
        for a in [1.5, 2.0, 3.0] {
            let st = StitchingFunctions::with_alpha(a).unwrap();
            let r = st.ell_budget(10_000);
            assert!(r.holds, "{a} {r:?}");
            assert!(r.partial + r.tail_lower > 1.0 - 1e-5);
            assert!(r.partial + r.tail_lower <= 1.0);
            let r = st.g_budget(10_000);
            assert!(r.holds, "{a} {r:?}");
        }
    }

    #[test]
    fn corrupted_zeta_fails_budget() {
        let st = StitchingFunctions::with_zeta(2.0, 2.0, 2.0, 0.9 * zeta(2.0), zeta(3.0));
        assert!(!st.ell_budget(1000).holds);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(StitchingFunctions::new(1.0, 2.0, 2.0).is_err());
        assert!(StitchingFunctions::new(2.0, 1.0, 2.0).is_err());
        assert!(StitchingFunctions::new(2.0, 2.0, f64::NAN).is_err());
    }
}
