//! The `sepalabel` command line.
//!
//! Exit codes: 0 success, 1 failure or verification mismatch, 2 usage
//! error, 3 graph weights unusable for the requested labels, 4 a fault is
//! a query endpoint, 5 a requested vertex is missing from the archive.

mod commands;
mod manifest;
mod query;
mod verify;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::archive::Scheme;
use crate::count::{random_prime, suggested_prime_bits, CountMode};
use crate::gen::fixture_rng;

pub use manifest::{loglog_slope, sidecar, RunManifest};
pub use query::{run_query, QueryRequest, What};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_WEIGHTS: i32 = 3;
pub const EXIT_FAULT_ENDPOINT: i32 = 4;
pub const EXIT_MISSING_ID: i32 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> CliError {
        CliError { code, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> CliError {
        CliError::new(EXIT_USAGE, message)
    }

    pub fn failure(message: impl Into<String>) -> CliError {
        CliError::new(EXIT_FAILURE, message)
    }

    pub fn io(path: &Path, e: std::io::Error) -> CliError {
        CliError::failure(format!("{}: {e}", path.display()))
    }

    pub fn csv(e: csv::Error) -> CliError {
        CliError::failure(format!("writing CSV: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// `exact`, `mod:<bits>` (random prime of that size) or `mod:auto:<k>`
/// (prime sized for `k` faults on the input graph).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeSpec {
    Exact,
    Bits(u32),
    Auto(usize),
}

fn parse_mode(s: &str) -> Result<ModeSpec, String> {
    let bad = || format!("expected exact, mod:<bits> or mod:auto:<k>, got {s:?}");
    if s == "exact" {
        return Ok(ModeSpec::Exact);
    }
    let rest = s.strip_prefix("mod:").ok_or_else(bad)?;
    if let Some(k) = rest.strip_prefix("auto:") {
        return k.parse().map(ModeSpec::Auto).map_err(|_| bad());
    }
    let bits: u32 = rest.parse().map_err(|_| bad())?;
    if !(3..=63).contains(&bits) {
        return Err(format!("prime size must be 3..=63 bits, got {bits}"));
    }
    Ok(ModeSpec::Bits(bits))
}

impl ModeSpec {
    /// Concrete mode for an `n`-vertex graph; the prime is drawn from `seed`.
    pub fn resolve(self, n: usize, seed: u64, warn: &mut dyn FnMut(String)) -> CountMode {
        let bits = match self {
            ModeSpec::Exact => return CountMode::Exact,
            ModeSpec::Bits(b) => b,
            ModeSpec::Auto(k) => {
                let want = suggested_prime_bits(k, n);
                if want > 63 {
                    warn(format!("{want}-bit prime suggested for {k} faults; using 63 bits"));
                }
                want.clamp(3, 63)
            }
        };
        CountMode::Mod(random_prime(bits, &mut fixture_rng(seed)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Fault,
    Count,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::Fault => Scheme::Fault,
            SchemeArg::Count => Scheme::Count,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "sepalabel", version, about = "Fault-tolerant distance labels and shortest-path counting labels")]
pub struct Cli {
    /// Seed for generators, primes and sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Count arithmetic: exact, mod:<bits> or mod:auto:<k>.
    #[arg(long, global = true, default_value = "exact", value_parser = parse_mode)]
    pub mode: ModeSpec,
    /// Suppress informational messages.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a graph file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Build the decomposition tree and print a summary or a dump.
    Decompose(DecomposeArgs),
    /// Build a label archive and its per-vertex size report.
    Build(BuildArgs),
    /// Answer one query from an archive.
    Query(QueryArgs),
    /// Compare archive answers with direct searches on the graph.
    Verify(VerifyArgs),
    /// Label sizes over grids of several sizes, with a log-log slope.
    Stats(StatsArgs),
}

#[derive(Subcommand, Debug)]
pub enum GenKind {
    /// Bidirected grid with random weights.
    Grid {
        rows: usize,
        cols: usize,
        #[arg(long, default_value_t = 100)]
        max_weight: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parallel-edge counting gadget for a comma-separated bit string.
    Gadget {
        bits: String,
        #[arg(long, default_value_t = 1)]
        unit: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid encoding a boolean matrix, given as rows like `10;01` or drawn at random.
    Omv {
        #[arg(long, conflicts_with = "size")]
        matrix: Option<String>,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = crate::decomp::DEFAULT_LEAF_THRESHOLD)]
    pub leaf_threshold: usize,
    /// Region size bound for the r-division summary.
    #[arg(long)]
    pub r: Option<usize>,
    /// Print the full tree, one line per piece.
    #[arg(long)]
    pub dump: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long, default_value_t = crate::decomp::DEFAULT_LEAF_THRESHOLD)]
    pub leaf_threshold: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Size report path; defaults to `<out>.sizes.csv`.
    #[arg(long)]
    pub sizes: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub u: usize,
    #[arg(long)]
    pub v: usize,
    #[arg(long, conflicts_with = "faults")]
    pub fault: Option<usize>,
    /// Comma-separated faulty vertices.
    #[arg(long)]
    pub faults: Option<String>,
    #[arg(long, value_enum, default_value = "count")]
    pub what: What,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("sweep").required(true).args(["exhaustive", "samples"])))]
pub struct VerifyArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Largest fault set drawn when sampling counting queries.
    #[arg(long, default_value_t = 4)]
    pub max_faults: usize,
    /// Where to write the mismatch CSV.
    #[arg(long)]
    pub mismatches: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    /// Comma-separated perfect squares.
    #[arg(long)]
    pub sizes: String,
    #[arg(long, default_value_t = 100)]
    pub max_weight: u64,
    #[arg(long, default_value_t = crate::decomp::DEFAULT_LEAF_THRESHOLD)]
    pub leaf_threshold: usize,
    /// CSV path; the CSV goes to stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Output sinks plus the global flags.
pub struct Ctx<'a> {
    pub seed: u64,
    pub mode: ModeSpec,
    pub quiet: bool,
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

impl Ctx<'_> {
    pub fn info(&mut self, msg: impl AsRef<str>) {
        if !self.quiet {
            let _ = writeln!(self.err, "{}", msg.as_ref());
        }
    }

    pub fn warn(&mut self, msg: impl AsRef<str>) {
        let _ = writeln!(self.err, "warning: {}", msg.as_ref());
    }

    pub fn say(&mut self, msg: impl AsRef<str>) -> Result<(), CliError> {
        writeln!(self.out, "{}", msg.as_ref()).map_err(|e| CliError::failure(format!("writing output: {e}")))
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let mut ctx = Ctx { seed: cli.seed, mode: cli.mode, quiet: cli.quiet, out, err };
    match cli.command {
        Command::Gen { kind } => commands::gen(&mut ctx, kind),
        Command::Decompose(a) => commands::decompose(&mut ctx, a),
        Command::Build(a) => commands::build(&mut ctx, a),
        Command::Query(a) => query::cmd_query(&mut ctx, a),
        Command::Verify(a) => verify::cmd_verify(&mut ctx, a),
        Command::Stats(a) => commands::stats(&mut ctx, a),
    }
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
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let (mut out, mut err) = (stdout.lock(), stderr.lock());
    match run(cli, &mut out, &mut err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_parsing() {
        assert_eq!(parse_mode("exact"), Ok(ModeSpec::Exact));
        assert_eq!(parse_mode("mod:61"), Ok(ModeSpec::Bits(61)));
        assert_eq!(parse_mode("mod:auto:3"), Ok(ModeSpec::Auto(3)));
        assert!(parse_mode("mod:64").is_err());
        assert!(parse_mode("modulo").is_err());
    }

    #[test]
    fn auto_mode_clamps() {
        let mut warned = Vec::new();
        let m = ModeSpec::Auto(6).resolve(1024, 1, &mut |w| warned.push(w));
        assert!(matches!(m, CountMode::Mod(p) if p >= 1 << 62));
        assert_eq!(warned.len(), 1);
        assert_eq!(ModeSpec::Bits(20).resolve(10, 3, &mut |_| {}), ModeSpec::Bits(20).resolve(10, 3, &mut |_| {}));
    }
}
