use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use confseq_core::confseq::{
    BiasBound, ConfSeqConfig, ConfSeqState, DivergenceKind, LambdaSchedule, Observation, ReferenceCdf, Stream,
};
use confseq_core::estimators::{CostSpec, KernelSpec};

use crate::boundary::mean_setup;
use crate::fail::{config_error, input_error, io_error, Failure};
use crate::params::{parse_list, Common, KernelArg, ReferenceArg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MonitorKind {
    Dkw,
    Ks,
    Mmd,
    Tv,
    Kl,
    Ot,
    Mean,
}

#[derive(Debug, Args)]
pub struct MonitorArgs {
    #[arg(long, value_enum)]
    pub kind: MonitorKind,
    /// Input file; stdin when absent or `-`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

fn kind_from(kind: MonitorKind, c: &Common) -> Result<DivergenceKind, Failure> {
    Ok(match kind {
        MonitorKind::Dkw => {
            let cdf = match c.reference.unwrap_or(ReferenceArg::Uniform) {
                ReferenceArg::Uniform => {
                    let (lo, hi) = (c.ref_a.unwrap_or(0.0), c.ref_b.unwrap_or(1.0));
                    if !(hi > lo) {
                        return Err(config_error("--ref-a must be below --ref-b for a uniform reference"));
                    }
                    ReferenceCdf::Uniform { lo, hi }
                }
                ReferenceArg::Normal => {
                    let sd = c.positive("ref-b", c.ref_b, Some(1.0))?;
                    ReferenceCdf::Normal { mean: c.ref_a.unwrap_or(0.0), sd }
                }
            };
            DivergenceKind::Dkw { cdf }
        }
        MonitorKind::Ks => DivergenceKind::Ks,
        MonitorKind::Mmd => {
            let dim = c.d.unwrap_or(1);
            if dim == 0 {
                return Err(config_error("--d must be at least 1"));
            }
            let kernel = match c.kernel.unwrap_or(KernelArg::Gaussian) {
                KernelArg::Gaussian => KernelSpec::gaussian(c.positive("bandwidth", c.bandwidth, Some(1.0))?)
                    .map_err(|e| config_error(format!("--bandwidth: {e}")))?,
                KernelArg::Linear => KernelSpec::linear(c.positive("B", c.b, None)?),
            };
            DivergenceKind::Mmd { kernel, dim }
        }
        MonitorKind::Tv => DivergenceKind::Tv { p: c.probabilities()? },
        MonitorKind::Kl => {
            let schedule = match c.lambda {
                Some(l) if l > 0.0 && l <= 1.0 => LambdaSchedule::Constant(l),
                Some(l) => return Err(config_error(format!("--lambda must lie in (0, 1], got {l}"))),
                None => LambdaSchedule::SqrtKOverT,
            };
            let factor = c.factor.unwrap_or(2);
            if factor != 1 && factor != 2 {
                return Err(config_error(format!("--factor must be 1 or 2, got {factor}")));
            }
            DivergenceKind::Kl { p: c.probabilities()?, schedule, factor }
        }
        MonitorKind::Ot => {
            let m = c.cost()?;
            let k = m.len().max(m[0].len());
            let cost = CostSpec::matrix(m).map_err(|e| config_error(format!("--cost-matrix: {e}")))?;
            let bias = match c.bias_c {
                Some(v) if v >= 0.0 => BiasBound::InverseSqrtMin { c: v },
                Some(v) => return Err(config_error(format!("--bias-c must be nonnegative, got {v}"))),
                None => BiasBound::finite_alphabet(cost.delta, k),
            };
            DivergenceKind::Ot { cost, bias }
        }
        MonitorKind::Mean => {
            let (envelope, covering) = mean_setup(c)?;
            let raw = c.mu0.as_deref().ok_or_else(|| config_error("--mu0 is required for this kind"))?;
            let mu0 = parse_list(raw).map_err(|e| config_error(format!("--mu0: {e}")))?;
            if mu0.len() != c.d.unwrap_or(1) {
                return Err(config_error("--mu0 must have --d coordinates"));
            }
            DivergenceKind::Mean { mu0, envelope, covering }
        }
    })
}

fn categorical(kind: MonitorKind) -> bool {
    matches!(kind, MonitorKind::Tv | MonitorKind::Kl | MonitorKind::Ot)
}

/// `x,v`, `y,v`, `x,c1,c2,..`; one-sample kinds also take bare values.
fn parse_line(line: &str, kind: MonitorKind) -> Result<(Stream, Observation), String> {
    let mut fields: Vec<&str> = line.split(',').map(str::trim).collect();
    let stream = match fields[0] {
        "x" | "X" => Some(Stream::X),
        "y" | "Y" => Some(Stream::Y),
        _ => None,
    };
    if stream.is_some() {
        fields.remove(0);
    }
    if fields.is_empty() || fields.iter().any(|f| f.is_empty()) {
        return Err("missing value".into());
    }
    let stream = stream.unwrap_or(Stream::X);
    if categorical(kind) {
        if fields.len() != 1 {
            return Err("expected a single category".into());
        }
        let c = fields[0].parse::<usize>().map_err(|_| format!("'{}' is not a category index", fields[0]))?;
        return Ok((stream, Observation::Category(c)));
    }
    let values: Vec<f64> = fields
        .iter()
        .map(|f| f.parse::<f64>().map_err(|_| format!("'{f}' is not a number")))
        .collect::<Result<_, _>>()?;
    Ok((stream, if values.len() == 1 { Observation::Real(values[0]) } else { Observation::Point(values) }))
}

pub fn run(args: MonitorArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let common = match &args.config {
        Some(p) => args.common.clone().or(&crate::params::load_config(p)?),
        None => args.common.clone(),
    };
    let config = ConfSeqConfig {
        delta: common.delta()?,
        stitching: common.stitching()?,
        kind: kind_from(args.kind, &common)?,
        mode: common.mode(),
    };
    let mut state = ConfSeqState::new(config).map_err(|e| config_error(e.to_string()))?;

    let reader: Box<dyn BufRead> = match &args.input {
        Some(p) if p.as_os_str() != "-" => Box::new(std::io::BufReader::new(
            std::fs::File::open(p).map_err(|e| config_error(format!("--input: cannot open {}: {e}", p.display())))?,
        )),
        _ => Box::new(std::io::stdin().lock()),
    };
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(io_error)?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (stream, obs) =
            parse_line(line, args.kind).map_err(|e| input_error(format!("line {lineno}: {e}")))?;
        let rec = state.update(&obs, stream).map_err(|e| input_error(format!("line {lineno}: {e}")))?;
        let json = serde_json::to_string(&rec).map_err(|e| input_error(e.to_string()))?;
        writeln!(out, "{json}").map_err(io_error)?;
        out.flush().map_err(io_error)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_forms() {
        assert_eq!(parse_line("x,0.5", MonitorKind::Ks).unwrap(), (Stream::X, Observation::Real(0.5)));
        assert_eq!(parse_line("y, 2", MonitorKind::Ot).unwrap(), (Stream::Y, Observation::Category(2)));
        assert_eq!(parse_line("0.25", MonitorKind::Dkw).unwrap(), (Stream::X, Observation::Real(0.25)));
        assert_eq!(
            parse_line("x,1,2", MonitorKind::Mean).unwrap(),
            (Stream::X, Observation::Point(vec![1.0, 2.0]))
        );
        assert!(parse_line("x,", MonitorKind::Ks).is_err());
        assert!(parse_line("x,abc", MonitorKind::Ks).is_err());
        assert!(parse_line("x,1.5", MonitorKind::Tv).is_err());
    }
}
