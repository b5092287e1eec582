//! `napa` — scenario runner for the nanoparticle photoacoustic pipeline.
//!
//! One binary, seven subcommands: the single-run stages (`resonance`,
//! `forward-em`, `forward-pa`, `invert-acoustic`, `invert-em`,
//! `localize`) and the sweep harness (`experiment`). Every command
//! reads a TOML scenario (see `docs/scenario.md`) and writes CSV files
//! into `--out`.
//!
//! Exit codes: 0 success, 1 tolerance/criterion failure, 2 input error.

mod commands;
mod experiment;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "napa", version, about = "Nanoparticle photoacoustic simulations and inversions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file.
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR", default_value = "napa-out")]
    out: PathBuf,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Spectrum, resonance table and detuned frequencies.
    Resonance(Common),
    /// Electromagnetic forward solve (Lippmann–Schwinger).
    ForwardEm(Common),
    /// Photoacoustic forward: pressure traces at the scenario sensors.
    ForwardPa(Common),
    /// Acoustic inversion of the forward pressure data.
    InvertAcoustic(Common),
    /// Electromagnetic inversion: |u₀| (one particle) or |k| (dimer).
    InvertEm(Common),
    /// Particle localization from two-time boundary pressure.
    Localize(Common),
    /// Sweep harness: run a plan, optionally check tolerances.
    Experiment {
        #[command(flatten)]
        common: Common,
        /// Sweep specification `AXIS=v1,v2,...` with AXIS one of
        /// a | d | h | s | mesh. Omitted → empty sweep.
        #[arg(long, value_name = "AXIS=v1,v2,...")]
        sweep: Option<String>,
        /// Pipeline: forward-only | acoustic-roundtrip | full-inversion.
        #[arg(long, value_name = "NAME", default_value = "full-inversion")]
        pipeline: String,
        /// TOML file with `[tolerances]` (quantity → max relative error).
        #[arg(long, value_name = "PATH")]
        tolerance_file: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (&Common, Box<dyn FnOnce() -> commands::CmdResult>) = match &cli.cmd {
        Cmd::Resonance(c) => (c, Box::new(move || commands::resonance(c))),
        Cmd::ForwardEm(c) => (c, Box::new(move || commands::forward_em(c))),
        Cmd::ForwardPa(c) => (c, Box::new(move || commands::forward_pa(c))),
        Cmd::InvertAcoustic(c) => (c, Box::new(move || commands::invert_acoustic(c))),
        Cmd::InvertEm(c) => (c, Box::new(move || commands::invert_em(c))),
        Cmd::Localize(c) => (c, Box::new(move || commands::localize(c))),
        Cmd::Experiment {
            common,
            sweep,
            pipeline,
            tolerance_file,
        } => (
            common,
            Box::new(move || {
                experiment::experiment(common, sweep.as_deref(), pipeline, tolerance_file.as_deref())
            }),
        ),
    };
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::CmdError::Criterion(msg)) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(1)
        }
        Err(commands::CmdError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
