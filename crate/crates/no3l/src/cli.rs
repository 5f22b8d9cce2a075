//! Command-line surface.
//!
//! Exit statuses: 0 success, 1 a check failed (`verify` found triples,
//! `bench` saw a low density), 2 usage or runtime error.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use no3l_core::construct::{greedy_construct, modular_parabola};
use no3l_core::sampling::MAX_WINDOW_EXPONENT;
use no3l_core::SamplerConfig;

use crate::error::{Error, Result};
use crate::experiments::{self, TrialManifest};
use crate::{format, parallel};

#[derive(Debug, Parser)]
#[command(
    name = "no3l",
    version,
    about = "Randomized no-three-in-line constructions and their diagnostics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Delete the largest point of every collinear triple of the input set.
    DeleteMax,
    /// Greedy scan in norm-lexicographic order (needs --window).
    Greedy,
    /// The points ((t^2 - 1) mod p) + 1 for t = 1..p (needs --p).
    Parabola,
}

#[derive(Debug, clap::Args)]
pub struct ReportArgs {
    /// Report format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn non_negative(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s
        .parse()
        .map_err(|e| format!("`{s}` is not a number: {e}"))?;
    if !v.is_finite() || v < 0.0 {
        return Err(format!("must be a finite number >= 0, got {s}"));
    }
    Ok(v)
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the random set Q on the window [1, 2^W - 1]^2.
    Sample {
        /// Seed of the counter-based generator.
        #[arg(long)]
        seed: u64,
        /// Density constant c >= 0.
        #[arg(long, allow_negative_numbers = true, value_parser = non_negative)]
        c: f64,
        /// Window exponent W (shells 0..W-1).
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=MAX_WINDOW_EXPONENT as i64))]
        window: u32,
        /// Output point-set file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a no-three-in-line set.
    Construct {
        /// Input point set (delete-max only).
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Construction method.
        #[arg(long, value_enum)]
        method: Method,
        /// Prime modulus for the parabola.
        #[arg(long)]
        p: Option<u64>,
        /// Window exponent for greedy.
        #[arg(long)]
        window: Option<u32>,
        /// Output point-set file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Count collinear triples exactly; exit status 0 iff there are none.
    Verify {
        /// Point-set file to check.
        #[arg(long = "in")]
        input: PathBuf,
        /// Count only inside [1, n]^2.
        #[arg(long = "box", value_name = "N")]
        box_side: Option<u64>,
    },
    /// Run the trials described by a JSON manifest.
    Stats {
        /// Manifest with base_seed, trial_count, c, window_exponent and
        /// optionally t_exact_cap, output_dir, log_base.
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Exact line sums and variance bounds next to Monte Carlo moments.
    Lemmas {
        /// Smallest shell exponent T (at least 1).
        #[arg(long)]
        tmin: u32,
        /// Largest shell exponent T.
        #[arg(long)]
        tmax: u32,
        /// Density constant c >= 0.
        #[arg(long, allow_negative_numbers = true, value_parser = non_negative)]
        c: f64,
        /// Number of Monte Carlo seeds.
        #[arg(long)]
        trials: u32,
        /// First seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Run trials and check that median density ratios stay above alpha;
    /// exit status 1 lists the failing box sizes.
    Bench {
        /// Window exponent W; densities are measured for n = 16..2^(W-1).
        #[arg(long)]
        window: u32,
        /// Density constant c >= 0.
        #[arg(long, allow_negative_numbers = true, value_parser = non_negative)]
        c: f64,
        /// Number of trials (seeds seed..seed+trials).
        #[arg(long)]
        trials: u32,
        /// Smallest box side checked.
        #[arg(long)]
        nmin: u64,
        /// Required lower bound on every checked median ratio.
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        /// First seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        report: ReportArgs,
    },
}

/// What a command concluded, apart from its output.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    CheckFailed,
}

fn emit(
    report: &ReportArgs,
    json: impl FnOnce() -> Result<String>,
    csv: impl FnOnce() -> Result<String>,
) -> Result<()> {
    let text = match report.format {
        OutputFormat::Json => json()?,
        OutputFormat::Csv => csv()?,
    };
    match &report.out {
        Some(path) => experiments::write_file(path, &text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn read_set(path: &Path) -> Result<no3l_core::PointSet> {
    format::read(path)
}

pub fn run(cli: Cli) -> Result<Outcome> {
    parallel::init_thread_pool();
    match cli.command {
        Command::Sample {
            seed,
            c,
            window,
            out,
        } => {
            let cfg = SamplerConfig::new(seed, c, window)?;
            format::write(&parallel::sample_window(&cfg)?, &out)?;
            Ok(Outcome::Ok)
        }
        Command::Construct {
            input,
            method,
            p,
            window,
            out,
        } => {
            let set = match method {
                Method::DeleteMax => {
                    let input = input
                        .ok_or_else(|| Error::Invalid("--method delete-max needs --in".into()))?;
                    parallel::delete_max_of_triples(&read_set(&input)?)?
                }
                Method::Greedy => {
                    let w = window
                        .ok_or_else(|| Error::Invalid("--method greedy needs --window".into()))?;
                    greedy_construct(w)?
                }
                Method::Parabola => {
                    let p =
                        p.ok_or_else(|| Error::Invalid("--method parabola needs --p".into()))?;
                    modular_parabola(p)?
                }
            };
            format::write(&set, &out)?;
            Ok(Outcome::Ok)
        }
        Command::Verify { input, box_side } => {
            let set = read_set(&input)?;
            let n = match box_side {
                Some(side) => parallel::count_collinear_triples(&set.restricted_to_square(side))?,
                None => parallel::count_collinear_triples(set.points())?,
            };
            println!("triples: {n}");
            Ok(if n == 0 {
                Outcome::Ok
            } else {
                Outcome::CheckFailed
            })
        }
        Command::Stats { manifest, report } => {
            let m = TrialManifest::load(&manifest)?;
            let a = experiments::run_trials(&m)?;
            emit(
                &report,
                || experiments::aggregate_json(&a),
                || experiments::shells_csv(&a),
            )?;
            Ok(Outcome::Ok)
        }
        Command::Lemmas {
            tmin,
            tmax,
            c,
            trials,
            seed,
            report,
        } => {
            let r = experiments::lemma_report(tmin, tmax, c, seed, trials)?;
            emit(&report, || pretty(&r), || experiments::lemma_csv(&r))?;
            Ok(Outcome::Ok)
        }
        Command::Bench {
            window,
            c,
            trials,
            nmin,
            alpha,
            seed,
            report,
        } => {
            let m = TrialManifest::new(seed, trials, c, window);
            let (a, _) = experiments::execute(&m)?;
            let r = experiments::verify_theorem(&a, nmin, alpha)?;
            emit(&report, || pretty(&r), || experiments::theorem_csv(&r))?;
            if r.passed {
                Ok(Outcome::Ok)
            } else {
                let failing: Vec<String> = r.failing_n.iter().map(u64::to_string).collect();
                eprintln!(
                    "density check failed: median ratio below alpha = {alpha} at n = {}",
                    failing.join(", ")
                );
                Ok(Outcome::CheckFailed)
            }
        }
    }
}

/// Parses the process arguments, runs, and maps the result to an exit code.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
