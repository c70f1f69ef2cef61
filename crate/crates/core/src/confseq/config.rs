use std::fmt;
use std::sync::Arc;

use crate::bounds::radius::check_delta;
use crate::bounds::{CgfEnvelope, StitchingFunctions};
use crate::error::{Error, Result};
use crate::estimators::sample::check_probabilities;
use crate::estimators::{CostSpec, KernelSpec};

/// Which reading of the two-sample radii to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// The formulas exactly as printed.
    AsStated,
    /// Inner factors rederived from the sub-Gaussian parameters of the
    /// underlying bounded-difference arguments.
    #[default]
    DerivationConsistent,
}

pub type CdfFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type BiasFn = Arc<dyn Fn(u64, u64) -> f64 + Send + Sync>;

/// Reference distribution for the one-sample KS monitor.
#[derive(Clone)]
pub enum ReferenceCdf {
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64 },
    Custom(CdfFn),
}

impl ReferenceCdf {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Self::Normal { mean, sd } => {
                0.5 * statrs::function::erf::erfc(-(x - mean) / (sd * std::f64::consts::SQRT_2))
            }
            Self::Custom(f) => f(x),
        }
    }
}

impl fmt::Debug for ReferenceCdf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform { lo, hi } => write!(f, "Uniform({lo}, {hi})"),
            Self::Normal { mean, sd } => write!(f, "Normal({mean}, {sd})"),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Bias allowance `alpha_{c,ts}` for transport costs.
#[derive(Clone)]
pub enum BiasBound {
    /// `c / sqrt(t v s)`
    InverseSqrtMin { c: f64 },
    Custom(BiasFn),
}

impl BiasBound {
    pub fn eval(&self, t: u64, s: u64) -> f64 {
        match self {
            Self::InverseSqrtMin { c } => c / (t.min(s) as f64).sqrt(),
            Self::Custom(f) => f(t, s),
        }
    }

    /// `Delta sqrt(k) / 2` on a `k`-point alphabet with costs in `[0, Delta]`.
    pub fn finite_alphabet(delta: f64, k: usize) -> Self {
        Self::InverseSqrtMin { c: 0.5 * delta * (k as f64).sqrt() }
    }
}

impl fmt::Debug for BiasBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InverseSqrtMin { c } => write!(f, "InverseSqrtMin({c})"),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// `lambda_t` for the finite-alphabet KL boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSchedule {
    /// `min(1, sqrt(k / t))`
    SqrtKOverT,
    Constant(f64),
}

impl LambdaSchedule {
    pub fn at(&self, t: u64, k: usize) -> f64 {
        match *self {
            Self::SqrtKOverT => (k as f64 / t as f64).sqrt().min(1.0),
            Self::Constant(l) => l,
        }
    }
}

/// Covering number of the dual unit ball used by the mean boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Covering {
    /// Euclidean norm in `R^d`: `N = (1 + 2/gamma)^d`.
    Euclidean { d: usize, gamma: f64 },
    /// Absolute value on the line: `gamma = 0`, `N = 2`.
    Scalar,
    Custom { log_n: f64, gamma: f64 },
}

impl Covering {
    pub fn log_n(&self) -> f64 {
        match *self {
            Self::Euclidean { d, gamma } => d as f64 * (1.0 + 2.0 / gamma).ln(),
            Self::Scalar => std::f64::consts::LN_2,
            Self::Custom { log_n, .. } => log_n,
        }
    }

    pub fn gamma(&self) -> f64 {
        match *self {
            Self::Euclidean { gamma, .. } | Self::Custom { gamma, .. } => gamma,
            Self::Scalar => 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub enum DivergenceKind {
    /// `sup |F_t - F|` against a known CDF.
    Dkw { cdf: ReferenceCdf },
    /// Two-sample Kolmogorov-Smirnov.
    Ks,
    Mmd { kernel: KernelSpec, dim: usize },
    /// Total variation to a known law on `{0, .., k-1}`.
    Tv { p: Vec<f64> },
    Kl { p: Vec<f64>, schedule: LambdaSchedule, factor: u8 },
    /// Transport cost between two streams on the support of `cost` (indices).
    Ot { cost: CostSpec, bias: BiasBound },
    /// `|mu_t - mu0|` in the Euclidean norm.
    Mean { mu0: Vec<f64>, envelope: CgfEnvelope, covering: Covering },
}

impl DivergenceKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Dkw { .. } => "dkw",
            Self::Ks => "ks",
            Self::Mmd { .. } => "mmd",
            Self::Tv { .. } => "tv",
            Self::Kl { .. } => "kl",
            Self::Ot { .. } => "ot",
            Self::Mean { .. } => "mean",
        }
    }

    pub fn two_sample(&self) -> bool {
        matches!(self, Self::Ks | Self::Mmd { .. } | Self::Ot { .. })
    }
}

#[derive(Debug, Clone)]
pub struct ConfSeqConfig {
    pub delta: f64,
    pub stitching: StitchingFunctions,
    pub kind: DivergenceKind,
    pub mode: Mode,
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite")))
    }
}

impl ConfSeqConfig {
    pub fn new(delta: f64, kind: DivergenceKind) -> Result<Self> {
        let c = Self { delta, stitching: StitchingFunctions::default(), kind, mode: Mode::default() };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        check_delta(self.delta)?;
        match &self.kind {
            DivergenceKind::Dkw { cdf } => {
                if let ReferenceCdf::Uniform { lo, hi } = cdf {
                    if !(hi > lo) {
                        return Err(Error::InvalidArgument("uniform reference needs lo < hi".into()));
                    }
                }
                if let ReferenceCdf::Normal { sd, .. } = cdf {
                    if !(*sd > 0.0) {
                        return Err(Error::InvalidArgument("normal reference needs sd > 0".into()));
                    }
                }
            }
            DivergenceKind::Ks => {}
            DivergenceKind::Mmd { kernel, dim } => {
                finite("kernel bound", kernel.bound)?;
                if !(kernel.bound > 0.0) || *dim == 0 {
                    return Err(Error::InvalidArgument("MMD needs B > 0 and d >= 1".into()));
                }
            }
            DivergenceKind::Tv { p } => check_probabilities(p, p.len())?,
            DivergenceKind::Kl { p, schedule, factor } => {
                check_probabilities(p, p.len())?;
                if p.iter().any(|&v| v <= 0.0) {
                    return Err(Error::InvalidArgument("KL reference must have full support".into()));
                }
                if *factor != 1 && *factor != 2 {
                    return Err(Error::InvalidArgument("KL factor must be 1 or 2".into()));
                }
                if let LambdaSchedule::Constant(l) = schedule {
                    if !(*l > 0.0 && *l <= 1.0) {
                        return Err(Error::InvalidArgument("lambda must lie in (0, 1]".into()));
                    }
                }
            }
            DivergenceKind::Ot { cost, .. } => {
                finite("cost bound", cost.delta)?;
                if !(cost.delta > 0.0) {
                    return Err(Error::InvalidArgument("cost bound must be positive".into()));
                }
            }
            DivergenceKind::Mean { mu0, covering, .. } => {
                if mu0.is_empty() {
                    return Err(Error::InvalidArgument("mean reference is empty".into()));
                }
                for &v in mu0 {
                    finite("mu0", v)?;
                }
                let g = covering.gamma();
                if !(0.0..1.0).contains(&g) {
                    return Err(Error::InvalidArgument("covering gamma must lie in [0, 1)".into()));
                }
            }
        }
        Ok(())
    }
}
