use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use qgeom::qfield::parse_rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid value for --{flag}: {reason}")]
    Invalid { flag: &'static str, reason: String },
}

fn invalid(flag: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        flag,
        reason: reason.into(),
    }
}

#[derive(Parser, Debug)]
#[command(name = "verify", version, about = "Exact verification suites for the quantum hyperboloid and its q-deformed geometry")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Quotient dimensions of the truncated algebra.
    Flatness(RunArgs),
    /// Hecke symmetry, Koszul complex, Poincaré series, reflection equation algebra.
    Koszul(RunArgs),
    /// Multiplicities, differentials and cohomology of the de Rham complex.
    Derham(RunArgs),
    /// Braided action, quantum generators, α and projectivity.
    Tangent(RunArgs),
    /// Symmetric quantum metric.
    Metric(RunArgs),
    /// Partial connection.
    Connection(RunArgs),
    /// Every suite.
    All(RunArgs),
    /// Manage the product-table cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
        #[arg(long, global = true)]
        cache_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheAction {
    List,
    Clear,
    Inspect,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// `symbolic`, a rational `p/r`, or `random`.
    #[arg(long, default_value = "symbolic", allow_hyphen_values = true)]
    pub q: String,
    /// Seed for `--q random`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub c: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub hbar: String,
    /// Truncation degree of the algebra (tensor degree for `koszul`).
    #[arg(long, default_value_t = 5)]
    pub degree: usize,
    /// Largest spin asserted on; defaults to `degree - 2`.
    #[arg(long)]
    pub spin_cutoff: Option<usize>,
    /// Dimension of the space carrying the Hecke symmetry.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub no_cache: bool,
    /// Record wall-clock time per check (makes reports nondeterministic).
    #[arg(long)]
    pub timings: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Flatness,
    Koszul,
    Derham,
    Tangent,
    Metric,
    Connection,
    All,
}

impl Suite {
    pub fn expand(self) -> Vec<Suite> {
        use Suite::*;
        match self {
            All => vec![Flatness, Koszul, Derham, Tangent, Metric, Connection],
            s => vec![s],
        }
    }

    pub fn name(self) -> &'static str {
        use Suite::*;
        match self {
            Flatness => "flatness",
            Koszul => "koszul",
            Derham => "derham",
            Tangent => "tangent",
            Metric => "metric",
            Connection => "connection",
            All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QMode {
    Symbolic,
    Rational(BigRational),
    Random { seed: u64, value: BigRational },
}

impl QMode {
    pub fn rational(&self) -> Option<&BigRational> {
        match self {
            QMode::Symbolic => None,
            QMode::Rational(x) | QMode::Random { value: x, .. } => Some(x),
        }
    }

    /// Cache-key form of `q`.
    pub fn label(&self) -> String {
        match self.rational() {
            None => "symbolic".into(),
            Some(x) => x.to_string(),
        }
    }
}

impl fmt::Display for QMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Draws `p/r` with `p, r` uniform in `[2, 97]`, rejecting `p = r`.
pub fn random_q(seed: u64) -> BigRational {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let p: i64 = rng.gen_range(2..=97);
        let r: i64 = rng.gen_range(2..=97);
        if p != r {
            return BigRational::new(p.into(), r.into());
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub suite: Suite,
    pub q: QMode,
    pub c: BigRational,
    pub hbar: BigRational,
    pub degree: usize,
    pub spin_cutoff: usize,
    pub n: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub cache_dir: Option<PathBuf>,
    pub use_cache: bool,
    pub timings: bool,
}

impl RunConfig {
    pub fn from_args(suite: Suite, args: &RunArgs) -> Result<Self, ConfigError> {
        let q = match args.q.trim() {
            "symbolic" => QMode::Symbolic,
            "random" => {
                let seed = args.seed.unwrap_or(0);
                QMode::Random {
                    seed,
                    value: random_q(seed),
                }
            }
            s => {
                let x = parse_rational(s).map_err(|e| invalid("q", e.to_string()))?;
                if x.is_zero() || x.abs().is_one() {
                    return Err(invalid("q", format!("{x} is excluded (q must avoid 0 and ±1)")));
                }
                QMode::Rational(x)
            }
        };
        if args.seed.is_some() && !matches!(q, QMode::Random { .. }) {
            return Err(invalid("seed", "only meaningful with --q random"));
        }
        let c = parse_rational(&args.c).map_err(|e| invalid("c", e.to_string()))?;
        let hbar = parse_rational(&args.hbar).map_err(|e| invalid("hbar", e.to_string()))?;
        if args.degree < 2 {
            return Err(invalid("degree", format!("{} is below 2", args.degree)));
        }
        let spin_cutoff = args.spin_cutoff.unwrap_or(args.degree - 2);
        if spin_cutoff > args.degree - 1 {
            return Err(invalid(
                "spin-cutoff",
                format!("{spin_cutoff} exceeds degree - 1 = {}", args.degree - 1),
            ));
        }
        if args.n < 2 {
            return Err(invalid("n", format!("{} is below 2", args.n)));
        }
        Ok(RunConfig {
            suite,
            q,
            c,
            hbar,
            degree: args.degree,
            spin_cutoff,
            n: args.n,
            out: args.out.clone(),
            format: args.format,
            cache_dir: args.cache_dir.clone(),
            use_cache: !args.no_cache,
            timings: args.timings,
        })
    }

    /// Echo of everything that affects the results.
    pub fn echo(&self) -> serde_json::Value {
        let (mode, seed) = match &self.q {
            QMode::Symbolic => ("symbolic", None),
            QMode::Rational(_) => ("rational", None),
            QMode::Random { seed, .. } => ("random", Some(*seed)),
        };
        serde_json::json!({
            "command": self.suite,
            "q": self.q.label(),
            "q_mode": mode,
            "seed": seed,
            "c": self.c.to_string(),
            "hbar": self.hbar.to_string(),
            "degree": self.degree,
            "spin_cutoff": self.spin_cutoff,
            "n": self.n,
            "format": self.format,
        })
    }
}
