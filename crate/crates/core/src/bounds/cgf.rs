//! Upper bounds on cumulant generating functions and their Legendre duals.
//!
//! ```text
//! psi*(x)        = sup_{0 <= lambda < lambda_max} { lambda x - psi(lambda) }
//! (psi*)^{-1}(y) = inf { x : psi*(x) >= y }
//! ```

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

const GRID_POINTS: usize = 2048;
const INVERSE_CEILING: f64 = 1e15;

type PsiFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum CgfEnvelope {
    /// `psi(lambda) = lambda mu + lambda^2 kappa2 / 2` on `[0, inf)`.
    SubGaussian { mean_bound: f64, variance_proxy: f64 },
    /// `psi(lambda) = lambda mu + lambda^2 sigma2 / 2` on `[0, 1/alpha_scale)`.
    SubExponential { mean_bound: f64, sigma2: f64, alpha_scale: f64 },
    Tabulated(TabulatedCgf),
}

impl fmt::Debug for CgfEnvelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SubGaussian { mean_bound, variance_proxy } => f
                .debug_struct("SubGaussian")
                .field("mean_bound", mean_bound)
                .field("variance_proxy", variance_proxy)
                .finish(),
            Self::SubExponential { mean_bound, sigma2, alpha_scale } => f
                .debug_struct("SubExponential")
                .field("mean_bound", mean_bound)
                .field("sigma2", sigma2)
                .field("alpha_scale", alpha_scale)
                .finish(),
            Self::Tabulated(t) => t.fmt(f),
        }
    }
}

/// Piecewise-linear CGF bound through `(lambda_i, psi_i)`, optionally backed
/// by the exact function for local refinement.
#[derive(Clone)]
pub struct TabulatedCgf {
    lambdas: Vec<f64>,
    psi: Vec<f64>,
    slopes: Vec<f64>,
    exact: Option<PsiFn>,
}

impl fmt::Debug for TabulatedCgf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tabulated")
            .field("points", &self.lambdas.len())
            .field("lambda_max", &self.lambda_max())
            .field("refined", &self.exact.is_some())
            .finish()
    }
}

impl TabulatedCgf {
    pub fn new(lambdas: Vec<f64>, psi: Vec<f64>) -> Result<Self> {
        if lambdas.len() != psi.len() {
            return Err(Error::DimensionMismatch { expected: lambdas.len(), got: psi.len() });
        }
        if lambdas.len() < 2 {
            return Err(Error::NonConvexTable("need at least two grid points".into()));
        }
        if lambdas[0] != 0.0 || psi[0].abs() > 1e-12 {
            return Err(Error::NonConvexTable("grid must start at (0, 0)".into()));
        }
        let mut slopes = Vec::with_capacity(lambdas.len() - 1);
        for i in 1..lambdas.len() {
            let dl = lambdas[i] - lambdas[i - 1];
            if !(dl > 0.0) || !psi[i].is_finite() {
                return Err(Error::NonConvexTable(format!("bad grid point {i}")));
            }
            slopes.push((psi[i] - psi[i - 1]) / dl);
        }
        for i in 1..slopes.len() {
            let tol = 1e-9 * (1.0 + slopes[i].abs().max(slopes[i - 1].abs()));
            if slopes[i] < slopes[i - 1] - tol {
                return Err(Error::NonConvexTable(format!("slope decreases at point {i}")));
            }
        }
        if slopes[0] < -1e-12 {
            return Err(Error::NonConvexTable("psi decreases near 0".into()));
        }
        Ok(Self { lambdas, psi, slopes, exact: None })
    }

    /// Tabulates `psi` on `0` plus a log-spaced grid inside `(0, lambda_max)`
    /// and keeps `psi` for golden-section refinement.
    pub fn from_fn<F>(psi: F, lambda_max: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lambda_max > 0.0) {
            return Err(Error::InvalidArgument("lambda_max must be positive".into()));
        }
        let top = if lambda_max.is_finite() { lambda_max * (1.0 - 1e-9) } else { 1e6 };
        let mut lambdas = vec![0.0];
        let mut values = vec![psi(0.0)];
        for i in 0..GRID_POINTS {
            let e = -8.0 + 8.0 * i as f64 / (GRID_POINTS - 1) as f64;
            let l = top * 10f64.powf(e);
            let v = psi(l);
            if !v.is_finite() {
                break;
            }
            lambdas.push(l);
            values.push(v);
        }
        let mut table = Self::new(lambdas, values)?;
        table.exact = Some(Arc::new(psi));
        Ok(table)
    }

    pub fn lambda_max(&self) -> f64 {
        *self.lambdas.last().expect("nonempty")
    }

    fn dual(&self, x: f64) -> f64 {
        // lambda_i x - psi_i is unimodal in i: it rises while slope < x
        let i = self.slopes.partition_point(|&m| m < x);
        let mut best = self.lambdas[i] * x - self.psi[i];
        if let Some(f) = &self.exact {
            let lo = self.lambdas[i.saturating_sub(1)];
            let hi = self.lambdas[(i + 1).min(self.lambdas.len() - 1)];
            let h = |l: f64| l * x - f(l);
            best = best.max(golden_max(h, lo, hi));
        }
        best.max(0.0)
    }

    fn initial_slope(&self) -> f64 {
        self.slopes[0]
    }
}

fn golden_max<H: Fn(f64) -> f64>(h: H, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut hc, mut hd) = (h(c), h(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + b.abs()) {
            break;
        }
        if hc > hd {
            b = d;
            d = c;
            hd = hc;
            c = b - r * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + r * (b - a);
            hd = h(d);
        }
    }
    hc.max(hd).max(h(a)).max(h(b))
}

impl CgfEnvelope {
    pub fn sub_gaussian(mean_bound: f64, variance_proxy: f64) -> Self {
        Self::SubGaussian { mean_bound, variance_proxy }
    }

    pub fn sub_exponential(mean_bound: f64, sigma2: f64, alpha_scale: f64) -> Self {
        Self::SubExponential { mean_bound, sigma2, alpha_scale }
    }

    /// Largest `x` with `psi*(x) = 0`.
    pub fn mean_bound(&self) -> f64 {
        match self {
            Self::SubGaussian { mean_bound, .. } | Self::SubExponential { mean_bound, .. } => *mean_bound,
            Self::Tabulated(t) => t.initial_slope(),
        }
    }

    pub fn legendre_dual(&self, x: f64) -> f64 {
        match self {
            Self::SubGaussian { mean_bound, variance_proxy } => {
                let z = x - mean_bound;
                if z <= 0.0 {
                    0.0
                } else if *variance_proxy <= 0.0 {
                    f64::INFINITY
                } else {
                    z * z / (2.0 * variance_proxy)
                }
            }
            Self::SubExponential { mean_bound, sigma2, alpha_scale } => {
                let z = x - mean_bound;
                if z <= 0.0 {
                    0.0
                } else if *alpha_scale <= 0.0 {
                    Self::sub_gaussian(*mean_bound, *sigma2).legendre_dual(x)
                } else if z < sigma2 / alpha_scale {
                    z * z / (2.0 * sigma2)
                } else {
                    z / alpha_scale - sigma2 / (2.0 * alpha_scale * alpha_scale)
                }
            }
            Self::Tabulated(t) => t.dual(x),
        }
    }

    pub fn dual_inverse(&self, y: f64) -> Result<f64> {
        let y = y.max(0.0);
        match self {
            Self::SubGaussian { mean_bound, variance_proxy } => {
                Ok(mean_bound + (2.0 * y * variance_proxy.max(0.0)).sqrt())
            }
            Self::SubExponential { mean_bound, sigma2, alpha_scale } => {
                let a = *alpha_scale;
                if a <= 0.0 {
                    return Ok(mean_bound + (2.0 * y * sigma2).sqrt());
                }
                if y < sigma2 / (2.0 * a * a) {
                    Ok(mean_bound + (2.0 * sigma2 * y).sqrt())
                } else {
                    Ok(mean_bound + y * a + sigma2 / (2.0 * a))
                }
            }
            Self::Tabulated(t) => {
                let lo0 = t.initial_slope();
                if y == 0.0 {
                    return Ok(lo0);
                }
                let mut lo = lo0;
                let mut step = 1.0f64.max(lo0.abs());
                let mut hi = lo0 + step;
                while t.dual(hi) < y {
                    lo = hi;
                    step *= 2.0;
                    hi = lo0 + step;
                    if hi > INVERSE_CEILING {
                        return Err(Error::OutOfRange(y));
                    }
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if t.dual(mid) >= y {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Ok(hi)
            }
        }
    }
}

/// `psi*(x)` for any envelope.
pub fn legendre_dual(envelope: &CgfEnvelope, x: f64) -> f64 {
    envelope.legendre_dual(x)
}

/// `(psi*)^{-1}(y)` for any envelope.
pub fn dual_inverse(envelope: &CgfEnvelope, y: f64) -> Result<f64> {
    envelope.dual_inverse(y)
}
