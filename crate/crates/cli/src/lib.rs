//! The `gof` command-line tool.
//!
//! `gof test` computes Monte-Carlo P-values and writes a JSON report,
//! `gof power` runs detection-rate and minimum-sample-size sweeps and writes
//! CSV, and `gof data` lists, dumps and checksums the bundled tables.
//!
//! Exit codes: 0 on success, 2 for usage errors (bad flags, specs, data), 3 for
//! numerical or estimation failures.

mod data_ref;
mod power_cmd;
mod report;
mod sweep;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use gof_core::datasets::{self, Format};
use gof_core::{Error, StatisticKind};

pub use data_ref::{resolve_dataset, DataRef};
pub use report::{TestReport, REPORT_VERSION};
pub use sweep::{parse_sweep, substitute, Sweep};

pub const WORKERS_ENV: &str = "GOF_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "gof", version, about = "Exact goodness-of-fit tests for discrete distributions")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, env = WORKERS_ENV)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte-Carlo P-values of observed counts under a model.
    Test(TestArgs),
    /// Detection rates and minimum sample sizes.
    Power(PowerArgs),
    /// Bundled datasets.
    #[command(subcommand)]
    Data(DataCommand),
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// `builtin:NAME`, `list:15,5,0`, `file:PATH` or a plain path.
    #[arg(long)]
    pub data: String,
    /// Model spec, e.g. `poisson-trunc{m=32}`.
    #[arg(long)]
    pub model: String,
    /// Comma-separated statistics (rms, chi2, g2, ft, nll) or `all`.
    #[arg(long, default_value = "chi2,g2,ft,nll,rms")]
    pub stats: String,
    #[arg(long, default_value_t = 40_000)]
    pub sims: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Report format: json or text.
    #[arg(long, default_value = "json")]
    pub format: String,
    /// Format of a data file: list, csv-indexed, square-table or triangle.
    #[arg(long)]
    pub input_format: Option<String>,
    /// Drop bins beyond the model's bin count instead of failing.
    #[arg(long)]
    pub truncate: bool,
    /// Test a seeded random subsample of this many draws.
    #[arg(long)]
    pub subsample: Option<u64>,
    /// Write every simulated statistic to this CSV file.
    #[arg(long)]
    pub dump_sims: Option<PathBuf>,
    /// Include wall-clock time in the report (breaks byte-reproducibility).
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    /// Null model spec; may reference sweep variables as `$m`.
    #[arg(long)]
    pub model: String,
    /// Actual distribution spec (must be fully specified).
    #[arg(long)]
    pub actual: String,
    #[arg(long, default_value = "rms,chi2")]
    pub stats: String,
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.99)]
    pub beta: f64,
    /// Simulations for both the null sample and the alternative datasets.
    #[arg(long, default_value_t = gof_core::power::DEFAULT_SIMS)]
    pub sims: u64,
    #[arg(long)]
    pub sims_null: Option<u64>,
    #[arg(long)]
    pub sims_alt: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Fixed sample size: report detection rates at this n instead of
    /// searching for the minimum n.
    #[arg(long)]
    pub n: Option<u64>,
    /// Sweep variable and values: `m=16,32,64`, `m=16..512*2`, `t=0.5..2+0.25`.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Draws used to calibrate a parameterized null.
    #[arg(long, default_value_t = gof_core::power::DEFAULT_CALIBRATION_DRAWS)]
    pub calibration: u64,
    #[arg(long, default_value_t = 16)]
    pub start: u64,
    #[arg(long, default_value_t = 5)]
    pub granularity: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: u64,
    /// Emit every evaluated (n, rate) pair of a minimum-n search.
    #[arg(long)]
    pub table: bool,
    /// Output format: csv or json.
    #[arg(long, default_value = "csv")]
    pub format: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum DataCommand {
    /// Names of the bundled datasets.
    List,
    /// Print a dataset.
    Dump {
        /// Builtin name or any data reference accepted by `test --data`.
        name: String,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        input_format: Option<String>,
    },
    /// SHA-256 of a dataset's canonical text.
    Checksum {
        name: String,
        #[arg(long)]
        input_format: Option<String>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Core(e) => match e {
                Error::Estimation { .. } | Error::Capacity { .. } => 3,
                _ => 2,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// What a command printed.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
}

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn parse_kinds(s: &str) -> CliResult<Vec<StatisticKind>> {
    if s.trim() == "all" {
        return Ok(StatisticKind::ALL.to_vec());
    }
    let mut out = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let k: StatisticKind = tok.parse()?;
        if !out.contains(&k) {
            out.push(k);
        }
    }
    if out.is_empty() {
        return Err(usage("--stats needs at least one statistic"));
    }
    Ok(out)
}

pub(crate) fn parse_format(s: &str) -> CliResult<Format> {
    Ok(s.parse::<Format>()?)
}

/// Arguments worth echoing in a report: everything except flags that do not
/// affect the result (`--workers`, `--out`, `--timing`).
pub fn command_echo(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip_next = false;
    for a in args {
        if skip_next {
            skip_next = false;
            continue;
        }
        match a.as_str() {
            "--workers" | "--out" => skip_next = true,
            "--timing" => {}
            s if s.starts_with("--workers=") || s.starts_with("--out=") => {}
            _ => out.push(a.clone()),
        }
    }
    out
}

/// Runs a command line (without the program name) and returns its output.
/// Files requested with `--out` / `--dump-sims` are written here.
pub fn execute(args: &[String]) -> CliResult<Outcome> {
    let argv = std::iter::once("gof".to_string()).chain(args.iter().cloned());
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Usage(format!("\u{0}{e}"))
        }
        _ => usage(e.to_string()),
    })?;
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(w) = cli.workers {
            if w == 0 {
                return Err(usage("--workers must be at least 1"));
            }
            b = b.num_threads(w);
        }
        b.build().map_err(|e| usage(e.to_string()))?
    };
    let echo = command_echo(args);
    pool.install(|| match cli.command {
        Command::Test(t) => report::cmd_test(&t, echo),
        Command::Power(p) => power_cmd::cmd_power(&p, echo),
        Command::Data(d) => cmd_data(&d),
    })
}

fn cmd_data(cmd: &DataCommand) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    match cmd {
        DataCommand::List => {
            for name in datasets::BUILTIN_NAMES {
                let ds = datasets::load_builtin(name)?;
                out.stdout += &format!("{name}\t{}\t{} draws\t{}\n", ds.shape, ds.total(), ds.note);
            }
        }
        DataCommand::Dump {
            name,
            format,
            input_format,
        } => {
            let ds = resolve_dataset(name, input_format.as_deref())?;
            let f = match format {
                Some(f) => parse_format(f)?,
                None => Format::native(ds.shape),
            };
            out.stdout = datasets::serialize(&ds, f)?;
        }
        DataCommand::Checksum { name, input_format } => {
            let ds = resolve_dataset(name, input_format.as_deref())?;
            out.stdout = format!("{}  {name}\n", ds.checksum());
        }
    }
    Ok(out)
}

/// Writes `text` to `path`, or returns it for stdout when no path is given.
pub(crate) fn emit(path: Option<&PathBuf>, text: String, out: &mut Outcome) -> CliResult<()> {
    match path {
        Some(p) => {
            let mut f = std::fs::File::create(p)?;
            f.write_all(text.as_bytes())?;
        }
        None => out.stdout += &text,
    }
    Ok(())
}

/// Entry point for the binary: runs, prints, and returns the exit code.
pub fn main_with(args: &[String]) -> i32 {
    match execute(args) {
        Ok(o) => {
            print!("{}", o.stdout);
            eprint!("{}", o.stderr);
            0
        }
        Err(CliError::Usage(msg)) if msg.starts_with('\u{0}') => {
            print!("{}", &msg[1..]);
            0
        }
        Err(e) => {
            eprintln!("gof: {e}");
            e.exit_code()
        }
    }
}
