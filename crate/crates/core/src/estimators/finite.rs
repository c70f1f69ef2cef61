//! Divergences between a finite-alphabet empirical measure and a reference `p`.

use super::sample::{check_probabilities, CategoricalCounts};
use crate::error::{Error, Result};

/// `1/2 sum_j |q_j - p_j|`
pub fn tv_probs(q: &[f64], p: &[f64]) -> f64 {
    0.5 * q.iter().zip(p).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// `sum_{q_j > 0} q_j log(q_j / p_j)`
pub fn kl_probs(q: &[f64], p: &[f64]) -> Result<f64> {
    let mut kl = 0.0;
    for (j, (&a, &b)) in q.iter().zip(p).enumerate() {
        if a > 0.0 {
            if b <= 0.0 {
                return Err(Error::AbsoluteContinuityViolated(j));
            }
            kl += a * (a / b).ln();
        }
    }
    Ok(kl.max(0.0))
}

/// Sup distance between CDFs on the ordered alphabet.
pub fn ks_probs(q: &[f64], p: &[f64]) -> f64 {
    let (mut fq, mut fp, mut d) = (0.0, 0.0, 0.0f64);
    for (a, b) in q.iter().zip(p) {
        fq += a;
        fp += b;
        d = d.max((fq - fp).abs());
    }
    d
}

/// `int |F_q - F_p|` for atoms at ascending `support`.
pub fn w1_probs(q: &[f64], p: &[f64], support: &[f64]) -> f64 {
    let (mut fq, mut fp, mut w) = (0.0, 0.0, 0.0);
    for j in 0..q.len().saturating_sub(1) {
        fq += q[j];
        fp += p[j];
        w += (fq - fp).abs() * (support[j + 1] - support[j]);
    }
    w
}

fn prepare(counts: &CategoricalCounts, p: &[f64]) -> Result<Vec<f64>> {
    check_probabilities(p, counts.k())?;
    if counts.t() == 0 {
        return Err(Error::EmptySample);
    }
    Ok(counts.frequencies())
}

pub fn tv_finite(counts: &CategoricalCounts, p: &[f64]) -> Result<f64> {
    Ok(tv_probs(&prepare(counts, p)?, p))
}

pub fn kl_finite(counts: &CategoricalCounts, p: &[f64]) -> Result<f64> {
    kl_probs(&prepare(counts, p)?, p)
}

pub fn ks_finite(counts: &CategoricalCounts, p: &[f64]) -> Result<f64> {
    Ok(ks_probs(&prepare(counts, p)?, p))
}

pub fn w1_finite(counts: &CategoricalCounts, p: &[f64], support: &[f64]) -> Result<f64> {
    let q = prepare(counts, p)?;
    if support.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: q.len(), got: support.len() });
    }
    if support.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("support must be strictly increasing".into()));
    }
    Ok(w1_probs(&q, p, support))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(v: &[u64]) -> CategoricalCounts {
        CategoricalCounts::new(v.to_vec()).unwrap()
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_finite(&c(&[2, 0]), &[0.5, 0.5]).unwrap(), 0.5);
        assert_eq!(tv_finite(&c(&[1, 3]), &[0.25, 0.75]).unwrap(), 0.0);
        assert!(matches!(tv_finite(&c(&[1, 3]), &[0.2, 0.3, 0.5]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_finite(&c(&[1, 1]), &[0.5, 0.5]).unwrap(), 0.0);
        assert!((kl_finite(&c(&[2, 0]), &[0.5, 0.5]).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(kl_finite(&c(&[1, 1]), &[1.0, 0.0]), Err(Error::AbsoluteContinuityViolated(1)));
        assert!(kl_finite(&c(&[2, 0]), &[1.0, 0.0]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let k = rng.random_range(2..6);
            let counts: Vec<u64> = (0..k).map(|_| rng.random_range(0..5)).collect();
            if counts.iter().sum::<u64>() == 0 {
                continue;
            }
            let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.01).collect();
            let z: f64 = raw.iter().sum();
            let mut p: Vec<f64> = raw.iter().map(|v| v / z).collect();
            let drift: f64 = 1.0 - p.iter().sum::<f64>();
            p[0] += drift;
            let cc = c(&counts);
            let kl = kl_finite(&cc, &p).unwrap();
            assert!(kl >= 0.0);
            let t = cc.t() as f64;
            let tv: f64 = 0.5 * counts.iter().zip(&p).map(|(&n, q)| (n as f64 / t - q).abs()).sum::<f64>();
            assert!((tv_finite(&cc, &p).unwrap() - tv).abs() < 1e-15);
            // Pinsker
            assert!(tv <= (kl / 2.0).sqrt() + 1e-12);
        }
    }

    #[test]
    fn ks_and_w1() {
        let q = c(&[2, 0, 2]);
        let p = [0.25, 0.5, 0.25];
        assert!((ks_finite(&q, &p).unwrap() - 0.25).abs() < 1e-15);
        assert!((w1_finite(&q, &p, &[0.0, 1.0, 2.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(w1_finite(&q, &p, &[0.0, 0.0, 1.0]).is_err());
    }
}
