//! Command-line front end. Every command writes one or more tables (CSV by
//! default, JSON with `--format json`), reads its parameters from flags and
//! optionally from a JSON config file (`--config`, flags win), and exits with
//! 0 on success, 1 when a verification fails and 2 on usage errors.

mod commands;
pub mod output;
mod selftest;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::classfun::ClassKind;
use crate::error::Error;
use crate::scalar::{format_rational, parse_rational};
use output::{Format, Sink, Table};

pub use selftest::{run_suites, SuiteResult};

/// Why a command did not succeed.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or parameters: exit code 2.
    Usage(String),
    /// A check ran and failed, or a computation broke: exit code 1.
    Failure(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) | Self::Failure(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::OutOfRange(_)
            | Error::Parse(_)
            | Error::UnknownFunction(_)
            | Error::NotNormalized
            | Error::LeadingCoefficient(_)
            | Error::InvalidCaratheodory(_)
            | Error::TooShort(_)
            | Error::SymmetryViolation { .. } => Self::Usage(e.to_string()),
            _ => Self::Failure(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Failure(format!("i/o error: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// A rational parameter given as `p/q`, an integer or an exact decimal.
#[derive(Debug, Clone, PartialEq)]
pub struct Ratio(pub BigRational);

impl FromStr for Ratio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        parse_rational(s).map(Ratio)
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = match Value::deserialize(d)? {
            Value::String(s) => s,
            Value::Number(n) => n.to_string(),
            other => return Err(serde::de::Error::custom(format!("expected a rational, got {other}"))),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Alpha,
    Beta,
}

impl From<KindArg> for ClassKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Alpha => ClassKind::Arg,
            KindArg::Beta => ClassKind::Re,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum BackendArg {
    #[default]
    Exact,
    Float,
}

#[derive(Debug, Parser)]
#[command(name = "bisym", version, about = "Coefficient bounds and checks for m-fold symmetric bi-univalent function classes")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<String>,
    /// Omit the `# generated` header line from CSV output.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// JSON object with default values for any flag; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coefficient bounds for a parameter grid.
    ///
    /// Columns: kind, m, alpha_or_beta, lambda, bound_a_m1, bound_a_2m1,
    /// corollary_match (empty when lambda != 1).
    Bounds(BoundsArgs),
    /// Inverse coefficients of an m-fold function by closed form and by reversion.
    ///
    /// Columns: coefficient, closed_form, reversion, difference.
    Invert(InvertArgs),
    /// Runs the built-in check suites; exit code 1 if any fails.
    ///
    /// Columns: suite, cases, failures, passed, first_failure.
    Selftest(SelftestArgs),
    /// Closed-form vs reversion inverse coefficients over random rational functions.
    ///
    /// Columns: m, samples, order, closed_form_mismatches,
    /// identity_mismatches, first_failing_seed.
    VerifyInversion(VerifyInversionArgs),
    /// Samples the class conditions for a function and for its inverse.
    ///
    /// Columns: kind, m, alpha_or_beta, lambda, side, verdict, worst_margin,
    /// witness_re, witness_im, tail_at_witness, points, branch_flags.
    Membership(MembershipArgs),
    /// Solves a_{m+1}, a_{2m+1} from a pair (p, q) and checks the result.
    ///
    /// Atoms are `weight@turns` separated by commas, e.g. `1/2@0,1/2@1/4`;
    /// `turns` is the point's angle as a fraction of a full turn. Weights may
    /// sum to less than one; the remainder is the constant part of p.
    /// Columns: quantity, value, magnitude.
    SolveCoeffs(SolveArgs),
    /// Seeded positive-real-part samples with coefficient checks.
    ///
    /// Columns: sample, seed, atoms, p_m_re, p_m_im, p_2m_re, p_2m_im,
    /// abs_p_m, lemma_slack, lemma_holds.
    CaratheodorySample(SampleArgs),
    /// Ensemble maxima of |a_{m+1}|, |a_{2m+1}| per cell, or a hill climb.
    ///
    /// Sweep columns: kind, m, alpha_or_beta, lambda, mode, samples,
    /// evaluated, accepted, max_a_m1, max_a_2m1, argmax_seed_a_m1,
    /// argmax_seed_a_2m1, unfiltered_max_a_m1, unfiltered_max_a_2m1,
    /// bound_a_m1, bound_a_2m1, ratio_a_m1, ratio_a_2m1, ceiling_a_m1.
    /// Climb columns: kind, m, alpha_or_beta, lambda, mode, seed, iterations,
    /// accepted_moves, start_a_m1, best_a_m1, a_2m1_at_best, ceiling_a_m1,
    /// bound_a_m1, ratio_to_ceiling, ratio_to_bound.
    Search(SearchArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct GridArgs {
    /// Class kind; inferred from --alpha/--beta when omitted.
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Fold orders (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<usize>,
    /// alpha values for the argument class (comma-separated rationals).
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<Ratio>,
    /// beta values for the real-part class (comma-separated rationals).
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<Ratio>,
    /// lambda values (comma-separated rationals); default 1.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<Ratio>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct InvertArgs {
    /// Fold order.
    #[arg(long)]
    pub m: Option<usize>,
    /// Coefficients a_{m+1}, a_{2m+1}, a_{3m+1}, ... (missing ones are zero).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coeffs: Vec<Ratio>,
    /// Catalog function name instead of coefficients.
    #[arg(long)]
    pub function: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SelftestArgs {
    /// Reduced ensemble sizes.
    #[arg(long)]
    pub quick: bool,
    /// Base seed of every ensemble.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Flips the sign of the closed-form inverse to exercise failure reporting.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyInversionArgs {
    /// Fold orders (comma-separated); default 1..6.
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<usize>,
    /// Random functions per fold order; default 100.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct MembershipArgs {
    /// Catalog function name.
    #[arg(long)]
    pub function: Option<String>,
    /// Coefficients a_{m+1}, a_{2m+1}, ... of a polynomial m-fold function.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coeffs: Vec<Ratio>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Fold order of the class (and of the function); default 1.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub alpha: Option<Ratio>,
    #[arg(long)]
    pub beta: Option<Ratio>,
    /// Default 1.
    #[arg(long)]
    pub lambda: Option<Ratio>,
    /// Truncation order of the inverse series; default 30.
    #[arg(long)]
    pub order: Option<usize>,
    /// Grid angles per radius; default 720.
    #[arg(long)]
    pub angles: Option<usize>,
    /// Largest sampled radius; default 0.95 (0.7 for the inverse).
    #[arg(long)]
    pub max_radius: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Default 1.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub alpha: Option<Ratio>,
    #[arg(long)]
    pub beta: Option<Ratio>,
    /// Default 1.
    #[arg(long)]
    pub lambda: Option<Ratio>,
    /// Atoms of p; without them a seeded constrained pair is drawn.
    #[arg(long)]
    pub p: Option<String>,
    /// Atoms of q; default is p with every point reflected.
    #[arg(long)]
    pub q: Option<String>,
    /// Seed for the drawn pair; default 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Arithmetic backend; default exact.
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleArgs {
    /// Default 1.
    #[arg(long)]
    pub m: Option<usize>,
    /// Atoms per sample; default drawn from 1..6.
    #[arg(long)]
    pub atoms: Option<usize>,
    /// Default 10.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    /// Samples per cell; default 10000.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Pair sampling; default realizable.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Hill climb per cell instead of a sweep.
    #[arg(long)]
    pub climb: bool,
    /// Hill-climb iterations; default 500.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Hill-climb start; default zero.
    #[arg(long, value_enum)]
    pub start: Option<StartArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Free,
    Realizable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StartArg {
    Zero,
    Extremal,
    Random,
}

/// Overlays explicitly given flags on the config file's values.
///
/// A flag counts as given unless it is absent, `false` or an empty list.
fn merge<T: Serialize + DeserializeOwned>(flags: &T, file: &Map<String, Value>) -> CliResult<T> {
    let mut merged = file.clone();
    let Value::Object(given) = serde_json::to_value(flags).map_err(|e| CliError::Usage(e.to_string()))? else {
        unreachable!("argument structs serialize to objects");
    };
    for (key, value) in given {
        let unset = match &value {
            Value::Null | Value::Bool(false) => true,
            Value::Array(a) => a.is_empty(),
            _ => false,
        };
        if !unset {
            merged.insert(key, value);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
}

fn load_config(path: &PathBuf) -> CliResult<Map<String, Value>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::Usage("config file must hold a JSON object".into())),
        Err(e) => Err(CliError::Usage(format!("invalid config {}: {e}", path.display()))),
    }
}

/// Global options as they may appear in a config file.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default)]
struct GlobalConfig {
    format: Option<Format>,
    output: Option<String>,
    no_timestamp: bool,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code().clamp(0, 255) as u8;
        }
    };
    match execute(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

/// Runs the parsed command, writing its tables. Returns whether every check passed.
pub fn execute(cli: &Cli) -> CliResult<bool> {
    let file = match &cli.config {
        Some(path) => load_config(path)?,
        None => Map::new(),
    };
    let global: GlobalConfig = merge(
        &GlobalConfig { format: cli.format, output: cli.output.clone(), no_timestamp: cli.no_timestamp },
        &file,
    )?;
    let sink = Sink { format: global.format.unwrap_or_default(), output: global.output, timestamp: !global.no_timestamp };
    let (tables, ok): (Vec<(&str, Table)>, bool) = match &cli.command {
        Command::Bounds(a) => commands::bounds(&merge(a, &file)?)?,
        Command::Invert(a) => commands::invert(&merge(a, &file)?)?,
        Command::Selftest(a) => selftest::selftest(&merge(a, &file)?)?,
        Command::VerifyInversion(a) => commands::verify_inversion(&merge(a, &file)?)?,
        Command::Membership(a) => commands::membership(&merge(a, &file)?)?,
        Command::SolveCoeffs(a) => commands::solve_coeffs(&merge(a, &file)?)?,
        Command::CaratheodorySample(a) => commands::caratheodory_sample(&merge(a, &file)?)?,
        Command::Search(a) => commands::search(&merge(a, &file)?)?,
    };
    sink.write(&tables)?;
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let file: Map<String, Value> =
            serde_json::from_str(r#"{"m": [2, 3], "alpha": [0.5, "1/3"], "lambda": [1], "kind": "alpha"}"#).unwrap();
        let flags = BoundsArgs { grid: GridArgs { m: vec![4], ..Default::default() } };
        let merged = merge(&flags, &file).unwrap();
        assert_eq!(merged.grid.m, vec![4]);
        assert_eq!(merged.grid.alpha.len(), 2);
        assert_eq!(merged.grid.alpha[1].0, crate::scalar::rational(1, 3));
        assert_eq!(merged.grid.kind, Some(KindArg::Alpha));
    }

    #[test]
    fn bad_config_is_usage_error() {
        let file: Map<String, Value> = serde_json::from_str(r#"{"m": "many"}"#).unwrap();
        assert!(matches!(merge(&BoundsArgs::default(), &file), Err(CliError::Usage(_))));
    }
}
