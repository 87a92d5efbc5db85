//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{execute, CliError, Command, EXIT_CONFIG, EXIT_OK};
use crate::config::{Overrides, RunConfig};

/// Environment fallback for `--workers`.
pub const WORKERS_ENV: &str = "HE_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "holder-euler", version, about = "Euler scheme experiments for SDEs with Hölder diffusion coefficients")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Strong L1 error per level and the fitted convergence order.
    Converge(RunArgs),
    /// Predicted convergence order from the rate criteria.
    Predict(RunArgs),
    /// Inverse-moment functional with its refinement diagnostic.
    Moments(RunArgs),
    /// Feller boundary test.
    Feller(RunArgs),
    /// Itô lower-bound criterion.
    Ito(RunArgs),
    /// Time-change consistency check for prototype models.
    Timechange(RunArgs),
    /// Pathwise comparison of [model] against [model_hi].
    Compare(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Configuration file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    paths: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Level range `min:max`.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long = "ref-level")]
    ref_level: Option<String>,
    /// CSV output path.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads (default: HE_WORKERS, else all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    dry_run: bool,
    /// Drop exploding paths instead of aborting.
    #[arg(long)]
    allow_explosions: bool,
}

fn workers(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{WORKERS_ENV}: `{v}` is not a worker count"))),
        Err(_) => Ok(0),
    }
}

fn run_args(cmd: Command, a: RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let text = match &a.config {
        Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?,
        None => String::new(),
    };
    let overrides = Overrides {
        paths: a.paths,
        seed: a.seed,
        levels: a.levels,
        ref_level: a.ref_level,
        out: a.out,
        allow_explosions: a.allow_explosions,
    };
    let cfg = RunConfig::load(&text, &overrides)?;
    if a.dry_run {
        return write!(out, "{cfg}").map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers(a.workers)?)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    // the pool runs the command; its output is relayed afterwards
    let (mut out_buf, mut err_buf) = (Vec::new(), Vec::new());
    let result = pool.install(|| execute(cmd, &cfg, &mut out_buf, &mut err_buf));
    let relay = out.write_all(&out_buf).and_then(|_| err.write_all(&err_buf));
    result?;
    relay.map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let (cmd, args) = match cli.command {
        Sub::Converge(a) => (Command::Converge, a),
        Sub::Predict(a) => (Command::Predict, a),
        Sub::Moments(a) => (Command::Moments, a),
        Sub::Feller(a) => (Command::Feller, a),
        Sub::Ito(a) => (Command::Ito, a),
        Sub::Timechange(a) => (Command::TimeChange, a),
        Sub::Compare(a) => (Command::Compare, a),
    };
    match run_args(cmd, args, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "holder-euler {}: {e}", cmd.name());
            e.exit_code()
        }
    }
}
