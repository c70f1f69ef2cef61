//! Maximum mean discrepancy.
//!
//! ```text
//! MMD_V(P_t, Q_s)^2 = 1/t^2 sum K(x_i, x_j) + 1/s^2 sum K(y_i, y_j) - 2/(ts) sum K(x_i, y_j)
//! MMD_U^2           = 1/(t(t-1)) sum_{i != j} J(Z_i, Z_j)
//! J((x, y), (x', y')) = K(x, x') + K(y, y') - K(x, y') - K(x', y)
//! ```

use nalgebra::DMatrix;

use super::sample::EmpiricalSample;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    /// `exp(-|a - b|^2 / (2 h^2))`
    Gaussian { bandwidth: f64 },
    /// `<a, b>`
    Linear,
    /// Points are indices (first coordinate) into a symmetric matrix.
    Custom { matrix: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// `sup K`, used by the boundaries.
    pub bound: f64,
}

impl KernelSpec {
    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0) {
            return Err(Error::InvalidArgument("bandwidth must be positive".into()));
        }
        Ok(Self { kind: KernelKind::Gaussian { bandwidth }, bound: 1.0 })
    }

    /// Linear kernel; `bound` is `sup <a, b>` over the data domain.
    pub fn linear(bound: f64) -> Self {
        Self { kind: KernelKind::Linear, bound }
    }

    pub fn custom(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n = matrix.len();
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            for j in 0..i {
                if (row[j] - matrix[j][i]).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!("kernel matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        let bound = matrix.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self { kind: KernelKind::Custom { matrix }, bound })
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match &self.kind {
            KernelKind::Gaussian { bandwidth } => {
                let d2: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum();
                (-d2 / (2.0 * bandwidth * bandwidth)).exp()
            }
            KernelKind::Linear => a.iter().zip(b).map(|(u, v)| u * v).sum(),
            KernelKind::Custom { matrix } => matrix[a[0] as usize][b[0] as usize],
        }
    }

    /// Smallest eigenvalue of the Gram matrix on `points`.
    pub fn min_gram_eigenvalue(&self, points: &EmpiricalSample) -> f64 {
        let n = points.len();
        let gram = DMatrix::from_fn(n, n, |i, j| self.eval(points.point(i), points.point(j)));
        gram.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Positive semidefiniteness spot check: smallest Gram eigenvalue `>= -1e-8`.
    pub fn psd_spot_check(&self, points: &EmpiricalSample) -> bool {
        self.min_gram_eigenvalue(points) >= -1e-8
    }
}

fn block_sum(kernel: &KernelSpec, a: &EmpiricalSample, wa: &[f64], b: &EmpiricalSample, wb: &[f64]) -> f64 {
    let mut total = 0.0;
    for (i, p) in a.points().enumerate() {
        let mut row = 0.0;
        for (j, q) in b.points().enumerate() {
            row += wb[j] * kernel.eval(p, q);
        }
        total += wa[i] * row;
    }
    total
}

/// Squared V-statistic before clamping.
pub fn mmd_v_squared_raw(x: &EmpiricalSample, y: &EmpiricalSample, kernel: &KernelSpec) -> Result<f64> {
    let wx = vec![1.0 / x.len() as f64; x.len()];
    let wy = vec![1.0 / y.len() as f64; y.len()];
    weighted_raw(x, &wx, y, &wy, kernel)
}

fn weighted_raw(x: &EmpiricalSample, wx: &[f64], y: &EmpiricalSample, wy: &[f64], kernel: &KernelSpec) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySample);
    }
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), got: y.dim() });
    }
    if wx.len() != x.len() || wy.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: wx.len() });
    }
    let xx = block_sum(kernel, x, wx, x, wx);
    let yy = block_sum(kernel, y, wy, y, wy);
    let xy = block_sum(kernel, x, wx, y, wy);
    Ok(xx + yy - 2.0 * xy)
}

pub fn mmd_v(x: &EmpiricalSample, y: &EmpiricalSample, kernel: &KernelSpec) -> Result<f64> {
    Ok(mmd_v_squared_raw(x, y, kernel)?.max(0.0).sqrt())
}

/// MMD between the weighted measures `sum wx_i d_{x_i}` and `sum wy_j d_{y_j}`.
pub fn mmd_v_weighted(
    x: &EmpiricalSample,
    wx: &[f64],
    y: &EmpiricalSample,
    wy: &[f64],
    kernel: &KernelSpec,
) -> Result<f64> {
    Ok(weighted_raw(x, wx, y, wy, kernel)?.max(0.0).sqrt())
}

/// Unbiased estimate of `MMD^2` from paired observations `(x_i, y_i)`.
pub fn mmd_u_squared(x: &EmpiricalSample, y: &EmpiricalSample, kernel: &KernelSpec) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let t = x.len();
    if t < 2 {
        return Err(Error::InsufficientData { needed: 2, got: t });
    }
    let mut total = 0.0;
    for i in 0..t {
        for j in 0..t {
            if i != j {
                let (xi, yi, xj, yj) = (x.point(i), y.point(i), x.point(j), y.point(j));
                total += kernel.eval(xi, xj) + kernel.eval(yi, yj) - kernel.eval(xi, yj) - kernel.eval(xj, yi);
            }
        }
    }
    Ok(total / (t * (t - 1)) as f64)
}

/// Running kernel sums; one new point costs `O(t + s)` kernel evaluations.
#[derive(Debug, Clone)]
pub struct MmdState {
    kernel: KernelSpec,
    xs: EmpiricalSample,
    ys: EmpiricalSample,
    sum_xx: f64,
    sum_yy: f64,
    sum_xy: f64,
    clamped: u64,
}

impl MmdState {
    pub fn new(kernel: KernelSpec, dim: usize) -> Self {
        Self {
            kernel,
            xs: EmpiricalSample::empty(dim),
            ys: EmpiricalSample::empty(dim),
            sum_xx: 0.0,
            sum_yy: 0.0,
            sum_xy: 0.0,
            clamped: 0,
        }
    }

    pub fn push_x(&mut self, p: &[f64]) -> Result<()> {
        self.xs.push(p)?;
        let k = &self.kernel;
        let n = self.xs.len() - 1;
        let cross: f64 = self.xs.points().take(n).map(|q| k.eval(p, q)).sum();
        self.sum_xx += 2.0 * cross + k.eval(p, p);
        self.sum_xy += self.ys.points().map(|q| k.eval(p, q)).sum::<f64>();
        Ok(())
    }

    pub fn push_y(&mut self, p: &[f64]) -> Result<()> {
        self.ys.push(p)?;
        let k = &self.kernel;
        let n = self.ys.len() - 1;
        let cross: f64 = self.ys.points().take(n).map(|q| k.eval(p, q)).sum();
        self.sum_yy += 2.0 * cross + k.eval(p, p);
        self.sum_xy += self.xs.points().map(|q| k.eval(q, p)).sum::<f64>();
        Ok(())
    }

    pub fn t(&self) -> usize {
        self.xs.len()
    }

    pub fn s(&self) -> usize {
        self.ys.len()
    }

    pub fn x_sample(&self) -> &EmpiricalSample {
        &self.xs
    }

    pub fn y_sample(&self) -> &EmpiricalSample {
        &self.ys
    }

    /// Current `MMD_V`; `None` until both samples are nonempty.
    pub fn value(&mut self) -> Option<f64> {
        let (t, s) = (self.t() as f64, self.s() as f64);
        if t == 0.0 || s == 0.0 {
            return None;
        }
        let sq = self.sum_xx / (t * t) + self.sum_yy / (s * s) - 2.0 * self.sum_xy / (t * s);
        if sq < 0.0 {
            self.clamped += 1;
        }
        Some(sq.max(0.0).sqrt())
    }

    /// Number of negative radicands clamped to zero so far.
    pub fn clamped(&self) -> u64 {
        self.clamped
    }
}
