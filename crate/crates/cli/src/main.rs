// SPDX-License-Identifier: Apache-2.0

//! `wlab`: detection-table derivation, identity checks, key-rate sweeps and
//! protocol enumeration/simulation for the four-party W-state analyzer.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use commands::{Outcome, EXIT_USAGE};
use config::{Format, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "wlab",
    version,
    about = "W-state analyzer and four-party MDI-QKD toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derive the detection table and compare it with the golden copy.
    DeriveTable {
        /// Golden CSV to compare against instead of the built-in one.
        #[arg(long)]
        golden: Option<PathBuf>,
        #[command(flatten)]
        params: Params,
    },
    /// Run the exact identity suites.
    Verify {
        #[command(flatten)]
        params: Params,
    },
    /// Key-rate sweep over end-to-end distance, plus the secure distance.
    Keyrate {
        #[command(flatten)]
        params: Params,
    },
    /// Exact enumeration of the protocol model against the closed forms.
    Enumerate {
        #[command(flatten)]
        params: Params,
    },
    /// Monte-Carlo simulation of the protocol.
    Simulate {
        #[command(flatten)]
        params: Params,
    },
    /// Print the W-state and Bell-state catalog.
    Catalog {
        #[command(flatten)]
        params: Params,
    },
}

/// Shared parameters; each overrides the config file, which overrides the defaults.
#[derive(Args, Debug, Default)]
struct Params {
    /// Flat key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Fiber loss in dB/km [default: 0.2].
    #[arg(long)]
    alpha: Option<f64>,
    /// Detector efficiency [default: 0.145].
    #[arg(long)]
    eta_d: Option<f64>,
    /// Dark-count probability per slot [default: 6.02e-6].
    #[arg(long)]
    y0: Option<f64>,
    /// Sifting factor [default: 1].
    #[arg(long)]
    q: Option<f64>,
    /// Interferometer phase in radians [default: 0].
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Sweep start, end-to-end km [default: 0].
    #[arg(long)]
    dmin: Option<f64>,
    /// Sweep end and secure-distance search limit, end-to-end km [default: 300].
    #[arg(long)]
    dmax: Option<f64>,
    /// Sweep step in km [default: 1].
    #[arg(long)]
    dstep: Option<f64>,
    /// End-to-end distance for enumerate/simulate when --eta is absent [default: 100].
    #[arg(long)]
    distance: Option<f64>,
    /// Transmittance: one value or four comma-separated per-party values.
    #[arg(long)]
    eta: Option<String>,
    /// Monte-Carlo trials; accepts forms like 1e7 [default: 1e6].
    #[arg(long)]
    trials: Option<String>,
    /// RNG seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Accounting mode: paper or physical [default: paper].
    #[arg(long)]
    mode: Option<String>,
    /// Basis: z or x [default: z].
    #[arg(long)]
    basis: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Params {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let numeric = [
            ("alpha", self.alpha),
            ("eta_d", self.eta_d),
            ("y0", self.y0),
            ("q", self.q),
            ("delta", self.delta),
            ("dmin", self.dmin),
            ("dmax", self.dmax),
            ("dstep", self.dstep),
            ("distance", self.distance),
        ];
        for (k, v) in numeric {
            if let Some(v) = v {
                cfg.set(k, &v.to_string())?;
            }
        }
        let textual = [
            ("eta", &self.eta),
            ("trials", &self.trials),
            ("mode", &self.mode),
            ("basis", &self.basis),
        ];
        for (k, v) in textual {
            if let Some(v) = v {
                cfg.set(k, v)?;
            }
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        Ok(cfg)
    }
}

type Action<'a> = &'a dyn Fn(&RunConfig) -> Result<Outcome>;

fn run(cli: Cli) -> Result<(Outcome, RunConfig)> {
    let (params, action): (&Params, Action) = match &cli.command {
        Command::DeriveTable { golden, params } => {
            let golden = golden.as_deref().map(commands::read_golden).transpose()?;
            let cfg = params.resolve()?;
            return Ok((commands::derive_table(&cfg, golden.as_deref()), cfg));
        }
        Command::Verify { params } => (params, &|c| Ok(commands::verify_all(c))),
        Command::Keyrate { params } => (params, &commands::keyrate),
        Command::Enumerate { params } => (params, &commands::enumerate),
        Command::Simulate { params } => (params, &commands::simulate),
        Command::Catalog { params } => (params, &|c| Ok(commands::catalog(c))),
    };
    let cfg = params.resolve()?;
    Ok((action(&cfg)?, cfg))
}

fn emit(outcome: &Outcome, cfg: &RunConfig) -> Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.document)?,
        None => std::io::stdout().write_all(outcome.document.as_bytes())?,
    }
    eprintln!("{}", outcome.summary);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match run(cli).and_then(|(outcome, cfg)| emit(&outcome, &cfg).map(|_| outcome.code)) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
