//! Driver for the `verify` binary: configuration, suites, reports and the
//! product-table cache.

pub mod cache;
pub mod config;
pub mod report;
pub mod suites;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use qgeom::{QCtx, Scalar};

use cache::{resolve_dir, CacheError, TableCache};
use config::{CacheAction, Cli, Command, ConfigError, Format, RunArgs, RunConfig, Suite};
use report::Report;
use suites::{Coefficient, Runner};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Cache(#[from] CacheError),
}

fn run_with<F: Coefficient>(cfg: &RunConfig, ctx: QCtx<F>, cache: Option<&TableCache>) -> Result<Report, CacheError> {
    let runner = Runner::new(cfg, ctx, cache);
    let suites = cfg
        .suite
        .expand()
        .into_iter()
        .map(|s| runner.run(s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Report::new(cfg.echo(), suites))
}

/// Runs the configured suites and writes the report.
pub fn run(cfg: &RunConfig) -> Result<Report, RunError> {
    let cache = if cfg.use_cache {
        Some(TableCache::open(resolve_dir(cfg.cache_dir.as_deref()))?)
    } else {
        None
    };
    let report = match cfg.q.rational() {
        None => run_with(cfg, QCtx::new(Scalar::q()), cache.as_ref())?,
        Some(q) => run_with(cfg, QCtx::new(q.clone()), cache.as_ref())?,
    };
    let text = match cfg.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    match &cfg.out {
        Some(path) => cache::write_atomic(path, text.as_bytes())?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CacheError::Io {
                    path: "<stdout>".into(),
                    source,
                })?;
        }
    }
    Ok(report)
}

fn cache_command(action: CacheAction, dir: Option<&std::path::Path>) -> Result<(), CacheError> {
    let cache = TableCache::open(resolve_dir(dir))?;
    match action {
        CacheAction::List => {
            for e in cache.list()? {
                println!("{}", serde_json::to_string(&e).expect("entry serializes"));
            }
        }
        CacheAction::Clear => println!("removed {} entries from {}", cache.clear()?, cache.dir().display()),
        CacheAction::Inspect => {
            for e in cache.inspect()? {
                println!("{}", serde_json::to_string(&e).expect("entry serializes"));
            }
        }
    }
    Ok(())
}

fn suite_of(command: &Command) -> Option<(Suite, &RunArgs)> {
    Some(match command {
        Command::Flatness(a) => (Suite::Flatness, a),
        Command::Koszul(a) => (Suite::Koszul, a),
        Command::Derham(a) => (Suite::Derham, a),
        Command::Tangent(a) => (Suite::Tangent, a),
        Command::Metric(a) => (Suite::Metric, a),
        Command::Connection(a) => (Suite::Connection, a),
        Command::All(a) => (Suite::All, a),
        Command::Cache { .. } => return None,
    })
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    if let Command::Cache { action, cache_dir } = &cli.command {
        return match cache_command(*action, cache_dir.as_deref()) {
            Ok(()) => EXIT_PASS,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_CONFIG
            }
        };
    }
    let (suite, args) = suite_of(&cli.command).expect("run command");
    let result = RunConfig::from_args(suite, args)
        .map_err(RunError::from)
        .and_then(|cfg| run(&cfg));
    match result {
        Ok(report) if report.passed() => EXIT_PASS,
        Ok(report) => {
            eprintln!(
                "{} of {} checks failed",
                report.summary.failed,
                report.summary.failed + report.summary.passed
            );
            EXIT_CHECK_FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
