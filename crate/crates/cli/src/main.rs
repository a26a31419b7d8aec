mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dimdist::dyadic::Mode;

/// Dyadic cubes, cover-based dimension estimates and dimension-distortion
/// experiments on finite metric samples.
#[derive(Parser, Debug)]
#[command(name = "dimdist", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// TOML config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Strict dyadic parameters (b = 1/72) and zero-tolerance verification.
    #[arg(long, global = true, conflicts_with = "relaxed")]
    pub strict: bool,
    /// Relaxed dyadic parameters (b = 1/2).
    #[arg(long, global = true)]
    pub relaxed: bool,
}

impl GlobalArgs {
    pub fn mode(&self) -> Option<Mode> {
        if self.strict {
            Some(Mode::Strict)
        } else if self.relaxed {
            Some(Mode::Relaxed)
        } else {
            None
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build and verify a dyadic system; writes system.json and verification.json.
    Net,
    /// Box, Hausdorff and θ-intermediate dimension estimates with series CSVs.
    Dims,
    /// Compactly-Hölder p-sum profile of a map over a radius grid.
    Holder,
    /// Minimal Hajłasz-type gradient of a map.
    Gradient,
    /// Evaluate a dimension-distortion bound from the `[bound]` table.
    Bounds,
    /// Run the per-δ pushforward pipeline for every θ.
    Experiment,
    /// Write a generated point set as CSV.
    Generate {
        /// Generator spec, e.g. `cantor(1/3,8)`; defaults to `input.generator`.
        spec: Option<String>,
    },
}

/// Exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    /// Output could not be written.
    pub const OUTPUT: u8 = 1;
    /// Invalid config, input file or parameter.
    pub const INPUT: u8 = 2;
    /// Bound or invariant violation found (results are still written).
    pub const VIOLATION: u8 = 3;
    pub const NO_USABLE_SCALES: u8 = 4;
}

fn code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(dimdist::Error::NoUsableScales(_)) = cause.downcast_ref() {
            return exit::NO_USABLE_SCALES;
        }
        if cause.downcast_ref::<commands::WriteError>().is_some() {
            return exit::OUTPUT;
        }
    }
    exit::INPUT
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(exit::INPUT);
        }
    }
    let run = || -> anyhow::Result<u8> {
        let ctx = commands::Context::new(&cli.global)?;
        match &cli.command {
            Command::Net => ctx.net(),
            Command::Dims => ctx.dims(),
            Command::Holder => ctx.holder(),
            Command::Gradient => ctx.gradient(),
            Command::Bounds => ctx.bounds(),
            Command::Experiment => ctx.experiment(),
            Command::Generate { spec } => ctx.generate(spec.as_deref()),
        }
    };
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code_for(&e))
        }
    }
}
