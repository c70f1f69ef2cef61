use std::io::Write;

use clap::{Args, ValueEnum};
use confseq_core::bounds::CgfEnvelope;
use confseq_core::confseq::{
    dkw_boundary, entropy_bound, ks_two_sample_boundary, mean_boundary, mmd_boundary, mmd_u_boundary, ot_boundary,
    rademacher_bound, smoothed_boundary, smoothed_constants, tv_finite_boundary, BiasBound, Covering, KlBoundary,
    LambdaSchedule, Radii, SmoothedTarget,
};
use confseq_core::estimators::CostSpec;

use crate::fail::{config_error, io_error, Failure};
use crate::format::{parse_indices, sig12};
use crate::params::Common;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryKind {
    Dkw,
    Ks,
    Mmd,
    MmdU,
    Ot,
    Kl,
    Tv,
    SmoothedTv,
    SmoothedW1,
    Entropy,
    Rademacher,
    Mean,
}

impl BoundaryKind {
    fn two_sample(self) -> bool {
        matches!(self, Self::Ks | Self::Mmd | Self::Ot)
    }
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    #[arg(long, value_enum)]
    pub kind: BoundaryKind,
    /// First sample sizes: `a..b`, a comma list or a single value.
    #[arg(long)]
    pub t: String,
    /// Second sample sizes for two-sample kinds (defaults to `t`).
    #[arg(long)]
    pub s: Option<String>,
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

type RadiusFn = Box<dyn FnMut(u64, u64) -> Result<Radii, Failure>>;

fn core(e: confseq_core::Error) -> Failure {
    config_error(e.to_string())
}

fn one(f: impl Fn(u64) -> confseq_core::Result<f64> + 'static) -> RadiusFn {
    Box::new(move |t, _| f(t).map(|gamma| Radii { gamma, kappa: f64::NAN }).map_err(core))
}

fn build(kind: BoundaryKind, c: &Common, t_max: u64) -> Result<RadiusFn, Failure> {
    let delta = c.delta()?;
    let st = c.stitching()?;
    let mode = c.mode();
    Ok(match kind {
        BoundaryKind::Dkw => one(move |t| dkw_boundary(t, delta, &st)),
        BoundaryKind::Ks => Box::new(move |t, s| ks_two_sample_boundary(t, s, delta, &st, mode).map_err(core)),
        BoundaryKind::Mmd => {
            let b = c.positive("B", c.b, Some(1.0))?;
            Box::new(move |t, s| mmd_boundary(t, s, delta, &st, b, mode).map_err(core))
        }
        BoundaryKind::MmdU => {
            let b = c.positive("B", c.b, Some(1.0))?;
            one(move |t| mmd_u_boundary(t, delta, &st, b))
        }
        BoundaryKind::Ot => {
            let (cost_bound, default_bias) = match c.cost_matrix {
                Some(_) => {
                    let m = c.cost()?;
                    let k = m.len().max(m[0].len());
                    let spec = CostSpec::matrix(m).map_err(|e| config_error(format!("--cost-matrix: {e}")))?;
                    (spec.delta, Some(BiasBound::finite_alphabet(spec.delta, k)))
                }
                None => (c.positive("cost-bound", c.cost_bound, None)?, None),
            };
            let bias = match (c.bias_c, default_bias) {
                (Some(v), _) if v >= 0.0 => BiasBound::InverseSqrtMin { c: v },
                (Some(v), _) => return Err(config_error(format!("--bias-c must be nonnegative, got {v}"))),
                (None, Some(b)) => b,
                (None, None) => return Err(config_error("--bias-c is required unless --cost-matrix is given")),
            };
            Box::new(move |t, s| ot_boundary(t, s, delta, &st, cost_bound, &bias, mode).map_err(core))
        }
        BoundaryKind::Kl => {
            let p = c.probabilities()?;
            let schedule = match c.lambda {
                Some(l) if l > 0.0 && l <= 1.0 => LambdaSchedule::Constant(l),
                Some(l) => return Err(config_error(format!("--lambda must lie in (0, 1], got {l}"))),
                None => LambdaSchedule::SqrtKOverT,
            };
            let factor = c.factor.unwrap_or(2);
            if factor != 1 && factor != 2 {
                return Err(config_error(format!("--factor must be 1 or 2, got {factor}")));
            }
            let table = KlBoundary::new(&p, delta, st, schedule, factor, t_max)
                .map_err(|e| config_error(format!("--p/--lambda: {e}")))?;
            Box::new(move |t, _| Ok(Radii { gamma: table.gamma_at(t), kappa: f64::NAN }))
        }
        BoundaryKind::Tv => {
            let k = match (c.k, &c.p) {
                (Some(k), _) if k >= 2 => k,
                (Some(k), _) => return Err(config_error(format!("--k must be at least 2, got {k}"))),
                (None, Some(_)) => c.probabilities()?.len(),
                (None, None) => return Err(config_error("--k is required for this kind")),
            };
            one(move |t| tv_finite_boundary(t, delta, &st, k, mode))
        }
        BoundaryKind::SmoothedTv | BoundaryKind::SmoothedW1 | BoundaryKind::Entropy => {
            let d = c.d.unwrap_or(1);
            if d == 0 {
                return Err(config_error("--d must be at least 1"));
            }
            let sigma = c.positive("sigma", c.sigma, None)?;
            let tau2 = c.positive("tau2", c.tau2, Some(1.0))?;
            match kind {
                BoundaryKind::SmoothedTv => one(move |t| smoothed_boundary(t, delta, &st, d, sigma, tau2, SmoothedTarget::Tv)),
                BoundaryKind::SmoothedW1 => one(move |t| smoothed_boundary(t, delta, &st, d, sigma, tau2, SmoothedTarget::W1)),
                _ => {
                    let (_, cap) = smoothed_constants(d, sigma, tau2);
                    one(move |t| entropy_bound(t, delta, &st, d, sigma, cap))
                }
            }
        }
        BoundaryKind::Rademacher => {
            let rc = c.rademacher_c.ok_or_else(|| config_error("--rademacher-c is required for this kind"))?;
            if !(rc >= 0.0) {
                return Err(config_error(format!("--rademacher-c must be nonnegative, got {rc}")));
            }
            one(move |t| rademacher_bound(t, delta, &st, |n| rc / (n as f64).sqrt()))
        }
        BoundaryKind::Mean => {
            let (envelope, covering) = mean_setup(c)?;
            one(move |t| mean_boundary(t, delta, &st, &envelope, covering))
        }
    })
}

/// Envelope and covering for mean kinds: scalar covering in one dimension unless `--gamma-cov` is set.
pub fn mean_setup(c: &Common) -> Result<(CgfEnvelope, Covering), Failure> {
    let variance = c.positive("variance", c.variance, Some(1.0))?;
    let envelope = match c.sub_exp_alpha {
        None => CgfEnvelope::sub_gaussian(0.0, variance),
        Some(a) if a > 0.0 => CgfEnvelope::sub_exponential(0.0, variance, a),
        Some(a) => return Err(config_error(format!("--sub-exp-alpha must be positive, got {a}"))),
    };
    let d = c.d.unwrap_or(1);
    if d == 0 {
        return Err(config_error("--d must be at least 1"));
    }
    let covering = match c.gamma_cov {
        None if d == 1 => Covering::Scalar,
        None => Covering::Euclidean { d, gamma: 0.5 },
        Some(g) if g == 0.0 && d == 1 => Covering::Scalar,
        Some(g) if g > 0.0 && g < 1.0 => Covering::Euclidean { d, gamma: g },
        Some(g) => return Err(config_error(format!("--gamma-cov must lie in (0, 1), got {g}"))),
    };
    Ok((envelope, covering))
}

pub fn run(args: BoundaryArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let common = match &args.config {
        Some(p) => args.common.clone().or(&crate::params::load_config(p)?),
        None => args.common.clone(),
    };
    let ts = parse_indices(&args.t).map_err(|e| config_error(format!("--t: {e}")))?;
    let two = args.kind.two_sample();
    let ss = match (&args.s, two) {
        (Some(_), false) => return Err(config_error("--s applies only to two-sample kinds")),
        (Some(s), true) => Some(parse_indices(s).map_err(|e| config_error(format!("--s: {e}")))?),
        (None, _) => None,
    };
    let t_max = ts.iter().copied().max().unwrap_or(1);
    let mut radius = build(args.kind, &common, t_max)?;

    let pairs: Vec<(u64, u64)> = match &ss {
        Some(ss) => ts.iter().flat_map(|&t| ss.iter().map(move |&s| (t, s))).collect(),
        None => ts.iter().map(|&t| (t, t)).collect(),
    };
    let mut buf = String::with_capacity(32 * pairs.len() + 16);
    buf.push_str("t,s,gamma,kappa\n");
    for (t, s) in pairs {
        let r = radius(t, s)?;
        if two {
            buf.push_str(&format!("{t},{s},{},{}\n", sig12(r.gamma), sig12(r.kappa)));
        } else {
            buf.push_str(&format!("{t},,{},\n", sig12(r.gamma)));
        }
    }
    out.write_all(buf.as_bytes()).map_err(io_error)
}
