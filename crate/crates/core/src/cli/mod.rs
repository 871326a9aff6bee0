//! Config-driven experiment runner behind the `z2gauge` binary.
//!
//! `z2gauge run <config.toml> [--seed N] [--out PATH] [--threads N] [--format csv|jsonl]`
//!
//! The first output line is a header carrying a timestamp, the code version,
//! the RNG algorithm id, the SHA-256 of the resolved config and the resolved
//! config itself; everything after it depends only on the config.

mod config;
mod run;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{ChainPlan, CouplingSpec, ExperimentConfig, Format, OutputSpec, Prepared, Task, TaskOptions};
pub use run::{exit, exit_code_for, header, run, write_output, Outcome, Refusal, Row};

use crate::error::Error;
use crate::samplers::RngSpec;

#[derive(Debug, Parser)]
#[command(name = "z2gauge", version, about = "Z2 lattice gauge theory: exact oracles, couplings and Monte Carlo")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment described by a TOML config.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub config: PathBuf,
    /// Override `rng.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override `output.path`; `-` writes to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Load, override, validate. Errors carry the exit status to use.
pub fn load(args: &RunArgs) -> Result<Prepared, (i32, Error)> {
    let mut cfg = ExperimentConfig::load(&args.config).map_err(|e| (exit_code_for(&e), e))?;
    if let Some(seed) = args.seed {
        let stream = cfg.rng.as_ref().map_or(0, |r| r.stream);
        let algorithm = cfg.rng.as_ref().map(|r| r.algorithm.clone());
        let mut rng = RngSpec::new(seed, stream);
        if let Some(a) = algorithm {
            rng.algorithm = a;
        }
        cfg.rng = Some(rng);
    }
    if let Some(out) = &args.out {
        cfg.output.path = (out.as_os_str() != "-").then(|| out.clone());
    }
    if let Some(f) = args.format {
        cfg.output.format = f;
    }
    let base = args.config.parent().unwrap_or(Path::new("."));
    cfg.prepare(base).map_err(|e| (exit_code_for(&e), e))
}

/// Execute `run` and return the process exit status. Diagnostics go to
/// standard error.
pub fn execute(args: &RunArgs) -> i32 {
    let prepared = match load(args) {
        Ok(p) => p,
        Err((code, e)) => {
            eprintln!("error: {e}");
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(args.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return exit::CONFIG;
        }
    };
    let outcome = match pool.install(|| run(&prepared)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let written = (|| -> crate::Result<()> {
        let head = header(&prepared.resolved)?;
        let format = prepared.resolved.output.format;
        match &prepared.resolved.output.path {
            Some(path) => {
                let mut w = BufWriter::new(File::create(path)?);
                write_output(&mut w, format, &head, &outcome)?;
                w.flush()?;
            }
            None => {
                let stdout = std::io::stdout();
                let mut w = stdout.lock();
                write_output(&mut w, format, &head, &outcome)?;
                w.flush()?;
            }
        }
        Ok(())
    })();
    if let Err(e) = written {
        eprintln!("error: {e}");
        return exit::IO;
    }
    eprintln!(
        "{}: {} records, {} failed checks, {} refusals",
        outcome.task.id(),
        outcome.rows.len(),
        outcome.failed_checks(),
        outcome.refusals.len()
    );
    for r in &outcome.refusals {
        eprintln!("  {}: {}: {}", r.kind, r.item, r.message);
    }
    outcome.exit_code()
}
