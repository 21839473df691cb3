//! `sqzcav`: regime checks, Bloch dynamics, probe spectra, tier comparisons
//! and the three-level no-go scan from a JSON run configuration.
//!
//! Exit codes: 0 on success, 1 when a physical condition fails (regime
//! violated, unbalanced shifts, solver failure), 2 on usage, parse or
//! configuration errors.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{ProbeMode, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "sqzcav", version, about = "Λ-atom in a squeezed-light-driven cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Run configuration (JSON). Reference parameters when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV tables and the JSON result record.
    #[arg(long, global = true, default_value = "sqzcav-out")]
    out: PathBuf,
    /// Model tier, overriding the config.
    #[arg(long, global = true)]
    tier: Option<String>,
    /// Fock truncation, overriding the config.
    #[arg(long, global = true)]
    nmax: Option<usize>,
    /// Recorded in the result; every route is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the validity inequalities and the level-shift balance.
    Validate,
    /// Evolve the Bloch vector and fit its decay rates.
    Bloch,
    /// Probe transmission spectrum.
    Spectrum {
        #[arg(long, value_enum, default_value_t = Method::Analytic)]
        method: Method,
        #[arg(long, value_enum)]
        probe_mode: Option<ProbeModeArg>,
    },
    /// Trace distance between the ground-state dynamics of two tiers.
    Compare {
        #[arg(long)]
        tier_a: Option<String>,
        #[arg(long)]
        tier_b: Option<String>,
    },
    /// Three-level no-go scan over photon number and correlation.
    Nogo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Analytic,
    Numeric,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProbeModeArg {
    Single,
    Sym,
    Antisym,
    Custom,
}

/// An error tagged with its exit code.
pub struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self { code: 2, error: error.into() }
    }

    pub fn physics(error: impl Into<anyhow::Error>) -> Self {
        Self { code: 1, error: error.into() }
    }
}

/// Library errors about malformed input are usage errors; the rest are
/// physical failures.
impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        use sqzcav_core::Error as E;
        let input = error.chain().any(|e| matches!(e.downcast_ref::<E>(), Some(E::InvalidParameter(_) | E::DimensionMismatch { .. })));
        let core = error.chain().any(|e| e.downcast_ref::<E>().is_some());
        Self { code: if core && !input { 1 } else { 2 }, error }
    }
}

impl From<sqzcav_core::Error> for Failure {
    fn from(error: sqzcav_core::Error) -> Self {
        anyhow::Error::from(error).into()
    }
}

fn prepare(cli: &Cli) -> Result<RunConfig, Failure> {
    let c = &cli.common;
    let mut cfg = match &c.config {
        Some(path) => config::load(path).map_err(Failure::usage)?,
        None => RunConfig::default(),
    };
    if let Some(t) = &c.tier {
        cfg.tier = t.clone();
    }
    if let Some(n) = c.nmax {
        cfg.system.n_max = n;
    }
    match &cli.command {
        Command::Spectrum { probe_mode: Some(m), .. } => {
            cfg.probe.mode = match m {
                ProbeModeArg::Single => ProbeMode::Single,
                ProbeModeArg::Sym => ProbeMode::Sym,
                ProbeModeArg::Antisym => ProbeMode::Antisym,
                ProbeModeArg::Custom => ProbeMode::Custom,
            }
        }
        Command::Compare { tier_a, tier_b } => {
            if let Some(a) = tier_a {
                cfg.compare.tier_a = a.clone();
            }
            if let Some(b) = tier_b {
                cfg.compare.tier_b = b.clone();
            }
        }
        _ => {}
    }
    cfg.resolve().map_err(Failure::from)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(Failure::usage)?;
    }
    let cfg = prepare(&cli)?;
    let out = output::OutDir::create(&cli.common.out).map_err(Failure::usage)?;
    let ctx = commands::Context { cfg: &cfg, out: &out, seed: cli.common.seed };
    match cli.command {
        Command::Validate => commands::validate(&ctx),
        Command::Bloch => commands::bloch(&ctx),
        Command::Spectrum { method, .. } => commands::spectrum(&ctx, method),
        Command::Compare { .. } => commands::compare(&ctx),
        Command::Nogo => commands::nogo(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
