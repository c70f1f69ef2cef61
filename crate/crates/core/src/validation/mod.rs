//! Monte Carlo and exhaustive checks of coverage, bias and maximal inequalities.

pub mod bias;
pub mod coverage;
pub mod loo;
pub mod selftest;
pub mod ville;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use bias::{bias_direction_check, BiasKind, BiasPoint, BiasReport};
pub use coverage::{coverage_sim, CoverageOutcome, Scenario, ScenarioParams};
pub use loo::{leave_one_out_audit, LooKind, LooReport};
pub use selftest::{selftest, SelftestOptions, SelftestReport};
pub use ville::{reverse_ville_check, VilleProcess};

/// Independent stream `replicate` of the generator seeded by `seed`.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Summary of `R` independent trajectories.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub scenario: String,
    pub replications: u64,
    pub horizon: u64,
    pub violation_count: u64,
    pub violation_rate: f64,
    /// `sqrt(rate (1 - rate) / R)`
    pub std_error: f64,
    /// Nominal bound on the violation probability.
    pub target: f64,
    /// `target + 3 sqrt(target (1 - target) / R)`; the run passes when the rate does not exceed it.
    pub threshold: f64,
    pub passed: bool,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl SimReport {
    /// With a single replicate the rate carries no information and the check is skipped.
    pub fn new(scenario: &str, horizon: u64, violations: u64, replications: u64, target: f64, seed: u64) -> Self {
        let r = replications.max(1) as f64;
        let rate = violations as f64 / r;
        let target = target.clamp(0.0, 1.0);
        let threshold = target + 3.0 * (target * (1.0 - target) / r).sqrt();
        Self {
            scenario: scenario.to_string(),
            replications,
            horizon,
            violation_count: violations,
            violation_rate: rate,
            std_error: (rate * (1.0 - rate) / r).sqrt(),
            target,
            threshold,
            passed: replications <= 1 || rate <= threshold,
            seed,
            wall_time_s: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn report_predicate() {
        let r = SimReport::new("x", 10, 0, 100, 0.05, 1);
        assert!(r.passed);
        assert_eq!(r.violation_rate, 0.0);
        let r = SimReport::new("x", 10, 20, 100, 0.05, 1);
        assert!(!r.passed);
        let one = SimReport::new("x", 10, 1, 1, 0.05, 1);
        assert!(one.passed && one.violation_rate == 1.0);
    }

    #[test]
    fn streams_differ_and_repeat() {
        let a: u64 = replicate_rng(7, 0).random();
        let b: u64 = replicate_rng(7, 1).random();
        assert_ne!(a, b);
        assert_eq!(a, replicate_rng(7, 0).random::<u64>());
    }
}
