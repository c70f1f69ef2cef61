//! `confseq`: boundary tables, stream monitoring, simulations and self-tests.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod boundary;
mod fail;
mod format;
mod monitor;
mod params;
mod simulate;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use confseq_core::validation::{selftest, SelftestOptions};

use fail::{config_error, Failure, EXIT_SELFTEST};

#[derive(Debug, Parser)]
#[command(name = "confseq", version, about = "Anytime-valid confidence sequences for convex divergences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate radii as CSV `t,s,gamma,kappa`.
    Boundary(boundary::BoundaryArgs),
    /// Read `stream,value` lines and emit one JSON interval per line.
    Monitor(monitor::MonitorArgs),
    /// Run a Monte Carlo or exhaustive validation scenario.
    Simulate(simulate::SimulateArgs),
    /// Run the fast invariant suite.
    Selftest {
        #[arg(long, hide = true)]
        corrupt_zeta: bool,
    },
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) if p.as_os_str() != "-" => Box::new(BufWriter::new(
            File::create(p).map_err(|e| config_error(format!("--output: cannot create {}: {e}", p.display())))?,
        )),
        _ => Box::new(std::io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Boundary(args) => {
            let mut out = sink(args.output.as_deref())?;
            boundary::run(args, &mut out)?;
            out.flush().map_err(fail::io_error)
        }
        Command::Monitor(args) => {
            let mut out = sink(args.output.as_deref())?;
            monitor::run(args, &mut out)
        }
        Command::Simulate(args) => {
            let mut out = std::io::stdout().lock();
            simulate::run(args, &mut out)
        }
        Command::Selftest { corrupt_zeta } => {
            let report = selftest(SelftestOptions { corrupt_zeta });
            let mut out = std::io::stdout().lock();
            for c in &report.checks {
                let _ = writeln!(out, "{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            match report.first_failure {
                None => Ok(()),
                Some(name) => Err(Failure { code: EXIT_SELFTEST, message: format!("invariant {name} failed") }),
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}
