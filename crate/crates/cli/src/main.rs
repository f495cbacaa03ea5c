// SPDX-License-Identifier: Apache-2.0

//! `flexclass` command-line driver.
//!
//! The per-stage subcommands exchange JSON artifacts through a directory
//! (`--input`, defaulting to `--out`). `dse` runs every stage for the whole
//! grid in one go, and `report` rebuilds the tables from saved points.

mod config;
mod pipeline;

use clap::{Parser, Subcommand};
use config::{Overrides, RunConfig};
use flexclass::{Algorithm, FsMethod};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "flexclass", version, about = "Bespoke printed-classifier design-space exploration")]
struct Cli {
    /// Run configuration (TOML). Built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Directory holding upstream artifacts; defaults to the output directory.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Precision grid for `dse`, or the single precision for `compress`.
    #[arg(long, global = true, value_delimiter = ',')]
    precision: Option<Vec<u32>>,
    /// Sparsity grid for `dse`, or the single sparsity for `compress`.
    #[arg(long, global = true, value_delimiter = ',')]
    sparsity: Option<Vec<f64>>,
    /// Selection methods for `dse`, or the single method for `select`.
    #[arg(long, global = true, value_delimiter = ',')]
    fs: Option<Vec<FsMethod>>,
    /// Feature counts for `dse`, or the single count for `select`.
    #[arg(long, global = true, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Load the data, split and normalize it (features.json).
    Features,
    /// Rank features on the training split (selection.json).
    Select,
    /// Train one model on the selected columns (model.json).
    Train {
        #[arg(long)]
        algo: Algorithm,
        /// Index into the algorithm's hyperparameter grid; cross-validated
        /// grid search when omitted.
        #[arg(long)]
        hyper_id: Option<usize>,
    },
    /// Prune and quantize the trained model (quantized.json).
    Compress,
    /// Build the netlist and score it (netlist.json, classifier.v, point.json).
    Compile,
    /// Check a netlist against its quantized model.
    Simulate {
        /// Random vectors when the input space is too large to enumerate.
        #[arg(long, default_value_t = 1000)]
        vectors: usize,
    },
    /// Full design-space exploration.
    Dse,
    /// Rebuild the result tables from `point.json` files or a saved `points.json`.
    Report {
        #[arg(long, value_delimiter = ',')]
        points: Vec<PathBuf>,
    },
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Fail {
    Invalid(String),
    Mismatch(String),
}

impl Fail {
    fn code(&self) -> u8 {
        match self {
            Fail::Invalid(_) => 2,
            Fail::Mismatch(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Fail::Invalid(m) | Fail::Mismatch(m) => m,
        }
    }
}

impl From<flexclass::Error> for Fail {
    fn from(e: flexclass::Error) -> Self {
        match e {
            flexclass::Error::Verification { .. } => Fail::Mismatch(e.to_string()),
            other => Fail::Invalid(other.to_string()),
        }
    }
}

impl From<String> for Fail {
    fn from(s: String) -> Self {
        Fail::Invalid(s)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Fail> {
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let grid_flags = matches!(cli.cmd, Cmd::Dse);
    let overrides = Overrides {
        seed: cli.seed,
        workers: cli.workers,
        out: cli.out.clone(),
        // for the single-tuple stages these flags pick the tuple instead
        precision: cli.precision.clone().filter(|_| grid_flags),
        sparsity: cli.sparsity.clone().filter(|_| grid_flags),
        fs: cli.fs.clone().filter(|_| grid_flags),
        k: cli.k.clone().filter(|_| grid_flags),
    };
    let cfg = file.resolve(&overrides)?;
    let out = cfg.out_dir();
    let input = cli.input.clone().unwrap_or_else(|| out.clone());
    let ctx = pipeline::Ctx { cfg, out, input };

    match cli.cmd {
        Cmd::Features => pipeline::features(&ctx),
        Cmd::Select => pipeline::select(&ctx, one("fs", &cli.fs)?, one("k", &cli.k)?),
        Cmd::Train { algo, hyper_id } => pipeline::train(&ctx, algo, hyper_id),
        Cmd::Compress => {
            let sparsity = match &cli.sparsity {
                None => 0.0,
                s => one("sparsity", s)?,
            };
            pipeline::compress(&ctx, sparsity, one("precision", &cli.precision)?)
        }
        Cmd::Compile => pipeline::compile(&ctx),
        Cmd::Simulate { vectors } => pipeline::simulate(&ctx, vectors),
        Cmd::Dse => pipeline::dse(&ctx),
        Cmd::Report { points } => pipeline::report(&ctx, &points),
    }
}

fn one<T: Copy>(flag: &str, values: &Option<Vec<T>>) -> Result<T, Fail> {
    match values.as_deref() {
        Some([v]) => Ok(*v),
        Some(_) => Err(Fail::Invalid(format!("--{flag} takes a single value for this subcommand"))),
        None => Err(Fail::Invalid(format!("--{flag} is required for this subcommand"))),
    }
}
