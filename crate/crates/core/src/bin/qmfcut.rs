//! `qmfcut`: quantum max-flow / min-cut reports for cyclic tensor networks.
//!
//! Exit status: 0 when every check holds, 1 when a check fails (a JSON
//! failure record goes to stderr), 2 on usage errors.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qmfcut::cache::Cache;
use qmfcut::report::{parse_range, run_cached, Command, OutputFormat, PartitionSpec, RunConfig, DEFAULT_SEED};
use qmfcut::ScalarRing;

#[derive(Parser)]
#[command(name = "qmfcut", version, about = "Quantum max-flow and min-cut on cycles")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Estimate QMF' by sampling generic site tensors
    Qmf(Opts),
    /// Exact quantum min-cut of the extended cycle graph
    Qmc(Opts),
    /// QMF' estimate against QMC for one configuration
    Compare(Opts),
    /// Sweep N on the 4-cycle against the mod-4 parity bound
    Theorem1(Opts),
    /// Sweep (d, N), d ≡ 2 mod 4, with sign multiplicities and parity bounds
    Theorem2(Opts),
    /// Sweep d at N = n = 2 with the explicit kernel vectors
    Theorem3(Opts),
    /// Span of sampled states against the invariant dimension (--trials samples)
    InvariantSpan(Opts),
    /// QMF' against QMC over a grid of (m, N, n)
    Table(Opts),
}

/// A parsed range such as `2..8`; a newtype so clap sees one value.
#[derive(Clone)]
struct Dims(Vec<usize>);

fn dims(s: &str) -> Result<Dims, qmfcut::Error> {
    parse_range(s).map(Dims)
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
struct Opts {
    /// Cycle length(s), e.g. 4 or 2..8
    #[arg(long, value_parser = dims)]
    m: Option<Dims>,
    /// Half cycle length(s) for the theorem sweeps
    #[arg(long, value_parser = dims)]
    d: Option<Dims>,
    /// Physical dimension(s)
    #[arg(long = "N", value_parser = dims)]
    physical: Option<Dims>,
    /// Bond dimension(s); defaults to N
    #[arg(long, value_parser = dims)]
    n: Option<Dims>,
    /// odd-even, first-half, or sources/sinks such as 1,3/2,4
    #[arg(long, default_value = "odd-even", value_parser = |s: &str| s.parse::<PartitionSpec>())]
    partition: PartitionSpec,
    #[arg(long, default_value_t = qmfcut::qflow::DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// prime, prime:<p>, rational, or complex:<tol>
    #[arg(long, default_value = "prime", value_parser = |s: &str| s.parse::<ScalarRing>())]
    ring: ScalarRing,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Cache file (JSON lines); defaults to $QMFCUT_CACHE_DIR/cache.jsonl
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    no_cache: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let (command, opts) = match cli.command {
        Sub::Qmf(o) => (Command::Qmf, o),
        Sub::Qmc(o) => (Command::Qmc, o),
        Sub::Compare(o) => (Command::Compare, o),
        Sub::Theorem1(o) => (Command::Theorem1, o),
        Sub::Theorem2(o) => (Command::Theorem2, o),
        Sub::Theorem3(o) => (Command::Theorem3, o),
        Sub::InvariantSpan(o) => (Command::InvariantSpan, o),
        Sub::Table(o) => (Command::Table, o),
    };
    let config = RunConfig {
        command,
        m: opts.m.map(|v| v.0),
        d: opts.d.map(|v| v.0),
        physical: opts.physical.map(|v| v.0),
        n: opts.n.map(|v| v.0),
        partition: opts.partition,
        trials: opts.trials,
        seed: opts.seed,
        ring: opts.ring,
    };
    let format = match opts.format {
        Format::Json => OutputFormat::Json,
        Format::Csv => OutputFormat::Csv,
        Format::Text => OutputFormat::Text,
    };
    let cache = if opts.no_cache {
        None
    } else {
        opts.cache.map(Cache::new).or_else(Cache::from_env)
    };

    let outcome = match run_cached(&config, cache.as_ref()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let rendered = match outcome.render(format) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let _ = std::io::stdout().write_all(rendered.as_bytes());
    if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        let record = json!({
            "status": "assertion_failed",
            "config": &config,
            "failures": &outcome.failures,
        });
        eprintln!("{record}");
        ExitCode::from(1)
    }
}
