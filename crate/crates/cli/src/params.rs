//! Options shared by the subcommands, mergeable with a JSON config file.

use std::path::Path;

use clap::{Args, ValueEnum};
use confseq_core::bounds::StitchingFunctions;
use confseq_core::confseq::Mode;
use serde::Deserialize;

use crate::fail::{config_error, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    AsStated,
    DerivationConsistent,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::AsStated => Mode::AsStated,
            ModeArg::DerivationConsistent => Mode::DerivationConsistent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceArg {
    Uniform,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelArg {
    Gaussian,
    Linear,
}

/// Every option is optional so that flags can be layered over a config file.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct Common {
    /// Total error probability.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Stitching exponent (> 1).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Epoch base for the first index.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Epoch base for the second index.
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Kernel bound `sup K`.
    #[arg(long = "B")]
    #[serde(rename = "B")]
    pub b: Option<f64>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Cost bound for transport costs.
    #[arg(long)]
    pub cost_bound: Option<f64>,
    /// Cost matrix, rows separated by ';' and entries by ','.
    #[arg(long)]
    pub cost_matrix: Option<String>,
    /// Bias allowance `c / sqrt(t v s)` for transport costs.
    #[arg(long)]
    pub bias_c: Option<f64>,
    /// Alphabet size.
    #[arg(long)]
    pub k: Option<usize>,
    /// Reference probabilities, comma separated.
    #[arg(long)]
    pub p: Option<String>,
    /// Constant lambda for the KL boundary (default min(1, sqrt(k/t))).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Leading factor of the KL boundary, 1 or 2.
    #[arg(long)]
    pub factor: Option<u8>,
    /// Dimension.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub tau2: Option<f64>,
    /// Population Rademacher complexity is `rademacher-c / sqrt(t)`.
    #[arg(long)]
    pub rademacher_c: Option<f64>,
    /// Covering radius for the mean boundary, in [0, 1).
    #[arg(long)]
    pub gamma_cov: Option<f64>,
    /// Sub-Gaussian variance proxy for the mean boundary.
    #[arg(long)]
    pub variance: Option<f64>,
    /// Sub-exponential scale; switches the mean envelope to sub-exponential.
    #[arg(long)]
    pub sub_exp_alpha: Option<f64>,
    /// Reference mean for the mean monitor, comma separated.
    #[arg(long)]
    pub mu0: Option<String>,
    /// Reference law for the one-sample KS monitor.
    #[arg(long, value_enum)]
    pub reference: Option<ReferenceArg>,
    /// First reference parameter (uniform: lower end, normal: mean).
    #[arg(long)]
    pub ref_a: Option<f64>,
    /// Second reference parameter (uniform: upper end, normal: sd).
    #[arg(long)]
    pub ref_b: Option<f64>,
}

macro_rules! layer {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl Common {
    /// Fills unset options from `base`.
    pub fn or(mut self, base: &Common) -> Common {
        layer!(self, base, delta, alpha, eta, xi, mode, b, kernel, bandwidth, cost_bound, cost_matrix, bias_c, k, p,
            lambda, factor, d, sigma, tau2, rademacher_c, gamma_cov, variance, sub_exp_alpha, mu0, reference, ref_a,
            ref_b);
        self
    }

    pub fn delta(&self) -> Result<f64, Failure> {
        let d = self.delta.unwrap_or(0.05);
        if !(d > 0.0 && d < 1.0) {
            return Err(config_error(format!("--delta must lie in (0, 1), got {d}")));
        }
        Ok(d)
    }

    pub fn stitching(&self) -> Result<StitchingFunctions, Failure> {
        let flag = |name: &str, v: f64| -> Result<f64, Failure> {
            if v > 1.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(config_error(format!("--{name} must exceed 1, got {v}")))
            }
        };
        let alpha = flag("alpha", self.alpha.unwrap_or(2.0))?;
        let eta = flag("eta", self.eta.unwrap_or(2.0))?;
        let xi = flag("xi", self.xi.unwrap_or(2.0))?;
        StitchingFunctions::new(alpha, eta, xi).map_err(|e| config_error(e.to_string()))
    }

    pub fn mode(&self) -> Mode {
        self.mode.map(Mode::from).unwrap_or_default()
    }

    pub fn positive(&self, name: &str, v: Option<f64>, default: Option<f64>) -> Result<f64, Failure> {
        match v.or(default) {
            Some(x) if x > 0.0 && x.is_finite() => Ok(x),
            Some(x) => Err(config_error(format!("--{name} must be positive, got {x}"))),
            None => Err(config_error(format!("--{name} is required for this kind"))),
        }
    }

    pub fn probabilities(&self) -> Result<Vec<f64>, Failure> {
        let raw = self.p.as_deref().ok_or_else(|| config_error("--p is required for this kind"))?;
        let p = parse_list(raw).map_err(|e| config_error(format!("--p: {e}")))?;
        let sum: f64 = p.iter().sum();
        if p.len() < 2 || p.iter().any(|&v| !(v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(config_error("--p must list at least two nonnegative probabilities summing to 1"));
        }
        Ok(p)
    }

    pub fn cost(&self) -> Result<Vec<Vec<f64>>, Failure> {
        let raw = self.cost_matrix.as_deref().ok_or_else(|| config_error("--cost-matrix is required for this kind"))?;
        let rows: Vec<Vec<f64>> = raw
            .split(';')
            .map(parse_list)
            .collect::<Result<_, _>>()
            .map_err(|e| config_error(format!("--cost-matrix: {e}")))?;
        if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
            return Err(config_error("--cost-matrix rows must have equal length"));
        }
        Ok(rows)
    }
}

pub fn parse_list(raw: &str) -> Result<Vec<f64>, String> {
    raw.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("'{}' is not a number", s.trim())))
        .collect()
}

/// Reads `{"delta": 0.05, ...}` with keys named like the long flags.
pub fn load_config(path: &Path) -> Result<Common, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("--config: cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_error(format!("--config: {e}")))
}
