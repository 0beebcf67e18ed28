//! The `nbk` command line.
//!
//! Exit codes: 0 success, 2 invalid arguments, 3 a computation cap was hit,
//! 4 oracle/recurrence mismatch, 1 I/O failure.

mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::grid::{mode_grid, GridSpec, LabelledP, DEFAULT_P_LIST};
use crate::modes::{mode_search_with, SearchOptions};
use crate::oracle::{partition_count, pmf_direct, DEFAULT_ENUMERATION_CAP};
use crate::par::{map_collect, Execution};
use crate::params::validate_params;
use crate::pmf::{pmf_table_with, TableOptions, DEFAULT_TABLE_CAP};
use crate::prob::Arithmetic;
use crate::sampler::empirical_pmf_with;

pub use output::{parse_table_csv, parse_table_json, TableRow};

/// Environment variable overriding the table-size cap.
pub const TABLE_CAP_ENV: &str = "NBK_TABLE_CAP";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "nbk",
    version,
    about = "Negative binomial distribution of order k, type I: exact PMF, modes and mode bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Point {
    #[arg(long, allow_negative_numbers = true)]
    pub k: i64,
    #[arg(long, allow_negative_numbers = true)]
    pub r: i64,
    /// Success probability as a ratio (`1/2`) or decimal (`0.95`).
    #[arg(long, allow_hyphen_values = true)]
    pub p: String,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// PMF table for n = kr ..= n_max.
    Pmf {
        #[command(flatten)]
        point: Point,
        #[arg(long)]
        n_max: u64,
        /// Log-domain arithmetic instead of exact rationals.
        #[arg(long)]
        log: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Complete mode set.
    Mode {
        #[command(flatten)]
        point: Point,
        /// Exact arithmetic for every span (no certified floating-point path).
        #[arg(long)]
        exact: bool,
        /// Log-domain search with tolerance-based ties.
        #[arg(long, conflicts_with = "exact")]
        log: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Upper and lower bounds on the mode.
    Bounds {
        #[command(flatten)]
        point: Point,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Mode grid over ranges of k and r and a list of p.
    Table {
        /// Range `A..B` (inclusive) or a single value.
        #[arg(long, default_value = "2..5")]
        k: String,
        #[arg(long, default_value = "2..5")]
        r: String,
        /// Comma-separated probabilities.
        #[arg(long, default_value_t = DEFAULT_P_LIST.join(","))]
        p: String,
        /// Run cells one after another.
        #[arg(long)]
        sequential: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Check the recurrence against the brute-force closed form.
    Verify {
        #[command(flatten)]
        point: Point,
        #[arg(long)]
        n_max: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo histogram and total variation distance to the exact PMF.
    Sample {
        #[command(flatten)]
        point: Point,
        /// Number of draws.
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest n compared bin by bin; mass above is lumped.
        #[arg(long)]
        n_cap: Option<u64>,
        #[arg(long)]
        sequential: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
}

/// Parses `A..B`, `A..=B` or `A` into an inclusive list.
pub fn parse_range(s: &str) -> Result<Vec<u32>, Error> {
    let bad = || Error::NotApplicable(format!("bad range {s:?}; expected A..B"));
    let s = s.trim();
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo, hi.strip_prefix('=').unwrap_or(hi)),
        None => (s, s),
    };
    let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

fn table_cap() -> Result<u64, Error> {
    match std::env::var(TABLE_CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::NotApplicable(format!("{TABLE_CAP_ENV} must be an integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_TABLE_CAP),
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::IdentityViolation { .. } => EXIT_MISMATCH,
        e if e.is_cap_exceeded() => EXIT_CAP,
        _ => EXIT_INVALID,
    }
}

enum Failure {
    Compute(Error),
    Io(io::Error),
    Mismatch(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

/// Runs the CLI with process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI writing to the given streams; returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(Failure::Compute(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_IO
        }
        Err(Failure::Mismatch(msg)) => {
            let _ = writeln!(stderr, "verification failed: {msg}");
            EXIT_MISMATCH
        }
    }
}

fn emit(out: &OutputArgs, body: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match &out.output {
        Some(path) => File::create(path)?.write_all(body.as_bytes())?,
        None => stdout.write_all(body.as_bytes())?,
    }
    Ok(())
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Pmf {
            point,
            n_max,
            log,
            out,
        } => {
            let params = validate_params(point.k, point.r, &point.p)?;
            let options = TableOptions {
                cap: table_cap()?,
                arithmetic: if log { Arithmetic::Log } else { Arithmetic::Exact },
            };
            let table = pmf_table_with(&params, n_max, options)?;
            emit(&out, &output::pmf(&table, out.format), stdout)
        }
        Command::Mode {
            point,
            exact,
            log,
            out,
        } => {
            let params = validate_params(point.k, point.r, &point.p)?;
            let mut options = if exact {
                SearchOptions::exact_only()
            } else {
                SearchOptions::default()
            };
            options.cap = table_cap()?;
            if log {
                options.arithmetic = Arithmetic::Log;
            }
            let result = mode_search_with(&params, options)?;
            emit(&out, &output::mode(&params, &result, out.format), stdout)
        }
        Command::Bounds { point, out } => {
            let params = validate_params(point.k, point.r, &point.p)?;
            let b = crate::bounds::bounds(&params);
            emit(&out, &output::bounds(&params, &b, out.format), stdout)
        }
        Command::Table {
            k,
            r,
            p,
            sequential,
            out,
        } => {
            let ps = p
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(LabelledP::parse)
                .collect::<Result<Vec<_>, _>>()?;
            if ps.is_empty() {
                return Err(Error::InvalidP("empty p list".into()).into());
            }
            let spec = GridSpec {
                ks: parse_range(&k)?,
                rs: parse_range(&r)?,
                ps,
            };
            let options = SearchOptions {
                cap: table_cap()?,
                ..SearchOptions::default()
            };
            let execution = if sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            let cells = mode_grid(&spec, options, execution)?;
            emit(&out, &output::table(&cells, out.format), stdout)
        }
        Command::Verify { point, n_max, out } => {
            let params = validate_params(point.k, point.r, &point.p)?;
            let table = pmf_table_with(
                &params,
                n_max,
                TableOptions {
                    cap: table_cap()?,
                    ..TableOptions::default()
                },
            )?;
            // The tuple count grows with n, so the largest n decides feasibility.
            let largest = partition_count(n_max - params.support_min(), params.k());
            if largest > DEFAULT_ENUMERATION_CAP {
                return Err(Error::InfeasibleEnumeration {
                    count: largest,
                    cap: DEFAULT_ENUMERATION_CAP,
                }
                .into());
            }
            let ns: Vec<u64> = (params.support_min()..=n_max).collect();
            let checks = map_collect(Execution::Parallel, ns, |n| {
                pmf_direct(&params, n).map(|direct| {
                    let value = table.get(n).expect("n within table");
                    (n, direct == value)
                })
            })
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
            let mismatches: Vec<u64> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
            emit(
                &out,
                &output::verify(&params, checks.len(), &mismatches, out.format),
                stdout,
            )?;
            if mismatches.is_empty() {
                Ok(())
            } else {
                Err(Failure::Mismatch(format!(
                    "{} of {} entries differ, first at n = {}",
                    mismatches.len(),
                    checks.len(),
                    mismatches[0]
                )))
            }
        }
        Command::Sample {
            point,
            n,
            seed,
            n_cap,
            sequential,
            out,
        } => {
            let params = validate_params(point.k, point.r, &point.p)?;
            let n_cap = match n_cap {
                Some(c) => c,
                None => crate::bounds::upper_bound(&params)
                    .saturating_mul(4)
                    .max(params.support_min() + 20)
                    .min(params.support_min().saturating_add(table_cap()? - 1)),
            };
            let execution = if sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            let report = empirical_pmf_with(&params, n, seed, n_cap, execution)?;
            emit(&out, &output::sample(&report, out.format), stdout)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("nbk").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_range("2..=3").unwrap(), vec![2, 3]);
        assert_eq!(parse_range("4").unwrap(), vec![4]);
        assert!(parse_range("5..2").is_err());
        assert!(parse_range("0..2").is_err());
        assert!(parse_range("a..b").is_err());
    }

    #[test]
    fn mode_of_two_three_half() {
        let (code, out, _) = run_capture(&["mode", "--k", "2", "--r", "3", "--p", "0.5"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("modes: 13\n"), "{out}");
    }

    #[test]
    fn invalid_p_exits_two() {
        let (code, _, err) = run_capture(&["mode", "--k", "2", "--r", "2", "--p", "1.5"]);
        assert_eq!(code, EXIT_INVALID);
        assert!(err.contains("probability"));
        let (code, _, _) = run_capture(&["mode", "--k", "0", "--r", "2", "--p", "0.5"]);
        assert_eq!(code, EXIT_INVALID);
        let (code, _, _) = run_capture(&["mode", "--k", "2"]);
        assert_eq!(code, EXIT_INVALID);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("table"));
    }

    #[test]
    fn cap_exit_code() {
        assert_eq!(exit_code(&Error::TableTooLarge { requested: 2, cap: 1 }), EXIT_CAP);
        assert_eq!(
            exit_code(&Error::InfeasibleEnumeration { count: 2, cap: 1 }),
            EXIT_CAP
        );
        assert_eq!(
            exit_code(&Error::IdentityViolation {
                identity: "x",
                v: 1
            }),
            EXIT_MISMATCH
        );
        let (code, _, _) = run_capture(&["pmf", "--k", "2", "--r", "2", "--p", "0.5", "--n-max", "3"]);
        assert_eq!(code, EXIT_INVALID);
        let (code, _, _) = run_capture(&["verify", "--k", "8", "--r", "1", "--p", "0.5", "--n-max", "400"]);
        assert_eq!(code, EXIT_CAP);
    }

    #[test]
    fn verify_passes() {
        let (code, out, _) = run_capture(&["verify", "--k", "3", "--r", "2", "--p", "3/5", "--n-max", "30"]);
        assert_eq!(code, 0);
        assert!(out.contains("mismatches: 0"), "{out}");
    }
}
