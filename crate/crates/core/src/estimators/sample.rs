use crate::error::{Error, Result};

/// Observations in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    dim: usize,
    data: Vec<f64>,
    sorted: bool,
}

impl EmpiricalSample {
    pub fn from_scalars(values: Vec<f64>) -> Self {
        let sorted = values.windows(2).all(|w| w[0] <= w[1]);
        Self { dim: 1, data: values, sorted }
    }

    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(1, Vec::len);
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        let mut data = Vec::with_capacity(points.len() * dim);
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            data.extend_from_slice(p);
        }
        let sorted = dim == 1 && data.windows(2).all(|w| w[0] <= w[1]);
        Ok(Self { dim, data, sorted })
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, data: Vec::new(), sorted: true }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_sorted(&self) -> bool {
        self.sorted
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn push(&mut self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: point.len() });
        }
        if self.dim == 1 {
            if let Some(&last) = self.data.last() {
                self.sorted &= last <= point[0];
            }
        }
        self.data.extend_from_slice(point);
        Ok(())
    }

    /// Raw values of a one-dimensional sample.
    pub fn scalars(&self) -> Result<&[f64]> {
        if self.dim != 1 {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        Ok(&self.data)
    }

    /// Sorted copy of a one-dimensional sample.
    pub fn sorted_scalars(&self) -> Result<Vec<f64>> {
        let mut v = self.scalars()?.to_vec();
        if !self.sorted {
            v.sort_by(f64::total_cmp);
        }
        Ok(v)
    }
}

/// Counts over a finite alphabet `{0, .., k-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalCounts {
    counts: Vec<u64>,
    total: u64,
}

impl CategoricalCounts {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::InvalidArgument("alphabet needs at least two categories".into()));
        }
        let total = counts.iter().sum();
        Ok(Self { counts, total })
    }

    pub fn zeros(k: usize) -> Result<Self> {
        Self::new(vec![0; k])
    }

    pub fn from_observations(k: usize, obs: &[usize]) -> Result<Self> {
        let mut c = Self::zeros(k)?;
        for &j in obs {
            c.push(j)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, category: usize) -> Result<()> {
        let k = self.counts.len();
        let slot = self
            .counts
            .get_mut(category)
            .ok_or_else(|| Error::InvalidArgument(format!("category {category} outside alphabet of size {k}")))?;
        *slot += 1;
        self.total += 1;
        Ok(())
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn t(&self) -> u64 {
        self.total
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let t = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / t).collect()
    }
}

/// Checks that `p` is a probability vector of length `k`.
pub fn check_probabilities(p: &[f64], k: usize) -> Result<()> {
    if p.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: p.len() });
    }
    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidArgument("probabilities must be finite and nonnegative".into()));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("probabilities sum to {sum}, not 1")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_and_dims() {
        let s = EmpiricalSample::from_points(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.point(1), &[3.0, 4.0]);
        assert!(s.scalars().is_err());
        assert!(EmpiricalSample::from_points(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn sorted_flag_tracks_pushes() {
        let mut s = EmpiricalSample::from_scalars(vec![0.1, 0.2]);
        assert!(s.is_sorted());
        s.push(&[0.0]).unwrap();
        assert!(!s.is_sorted());
        assert_eq!(s.sorted_scalars().unwrap(), vec![0.0, 0.1, 0.2]);
    }

    #[test]
    fn counts() {
        let c = CategoricalCounts::from_observations(3, &[0, 2, 2]).unwrap();
        assert_eq!(c.counts(), &[1, 0, 2]);
        assert_eq!(c.t(), 3);
        assert!(CategoricalCounts::from_observations(3, &[3]).is_err());
        assert!(CategoricalCounts::new(vec![4]).is_err());
    }

    #[test]
    fn probability_checks() {
        assert!(check_probabilities(&[0.5, 0.5], 2).is_ok());
        assert!(check_probabilities(&[0.5, 0.5], 3).is_err());
        assert!(check_probabilities(&[0.6, 0.5], 2).is_err());
        assert!(check_probabilities(&[1.5, -0.5], 2).is_err());
    }
}
