//! Empirical Rademacher complexity of a finite class.
//!
//! `R_t = E_eps sup_f (1/t) |sum_i eps_i f(X_i)|`, with `f(X_i)` given as an
//! evaluation matrix (rows are samples, columns are functions).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const EXACT_MAX_T: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RademacherMode {
    Exact,
    MonteCarlo { n_draws: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RademacherEstimate {
    pub value: f64,
    /// Zero in exact mode.
    pub std_error: f64,
}

fn sup_abs(matrix: &[Vec<f64>], signs: impl Fn(usize) -> f64) -> f64 {
    let t = matrix.len();
    let mut sums = vec![0.0f64; matrix[0].len()];
    for (i, row) in matrix.iter().enumerate() {
        let e = signs(i);
        for (s, v) in sums.iter_mut().zip(row) {
            *s += e * v;
        }
    }
    sums.iter().fold(0.0f64, |b, s| b.max(s.abs())) / t as f64
}

pub fn rademacher_empirical(matrix: &[Vec<f64>], mode: RademacherMode) -> Result<RademacherEstimate> {
    let t = matrix.len();
    if t == 0 {
        return Err(Error::EmptySample);
    }
    let m = matrix[0].len();
    if m == 0 {
        return Err(Error::InvalidArgument("function class is empty".into()));
    }
    for row in matrix {
        if row.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: row.len() });
        }
    }
    match mode {
        RademacherMode::Exact => {
            if t > EXACT_MAX_T {
                return Err(Error::ExactTooLarge(t));
            }
            let n = 1u64 << t;
            let total: f64 = (0..n)
                .map(|mask| sup_abs(matrix, |i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }))
                .sum();
            Ok(RademacherEstimate { value: total / n as f64, std_error: 0.0 })
        }
        RademacherMode::MonteCarlo { n_draws, seed } => {
            if n_draws == 0 {
                return Err(Error::InvalidArgument("n_draws must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut signs = vec![0.0; t];
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..n_draws {
                for s in signs.iter_mut() {
                    *s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                }
                let v = sup_abs(matrix, |i| signs[i]);
                sum += v;
                sq += v * v;
            }
            let n = n_draws as f64;
            let mean = sum / n;
            let var = if n_draws > 1 { ((sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
            Ok(RademacherEstimate { value: mean, std_error: (var / n).sqrt() })
        }
    }
}
