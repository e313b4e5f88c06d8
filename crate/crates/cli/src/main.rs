//! `padic-potts`: JSON reports on stdout (or `--out`), a short human summary
//! on stderr.
//!
//! Exit codes: 0 success, 1 configuration error or failed verification,
//! 2 domain violation, 3 degeneracy at working precision, 4 enumeration
//! guard exceeded.

mod config;
mod suites;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use padic_potts::gibbs::classify_phase;
use padic_potts::potts::{compatibility_check, measure_norm_profile};
use padic_potts::{Error, Prime};
use serde::Serialize;
use serde_json::{json, Value};

use config::RunConfig;
use suites::Suite;

#[derive(Parser)]
#[command(
    name = "padic-potts",
    version,
    about = "Gibbs measures of the p-adic Potts model on Cayley trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
pub struct Common {
    /// The prime p.
    #[arg(long, global = true, default_value_t = 3)]
    pub p: u64,
    /// Number of spin values.
    #[arg(long, global = true, default_value_t = 3)]
    pub q: u32,
    /// Branching: every vertex has k successors, the root k + 1.
    #[arg(long, global = true, default_value_t = 2)]
    pub k: u32,
    /// Depth of the finite volume.
    #[arg(long, global = true, default_value_t = 2)]
    pub n: u32,
    /// Target p-adic digits N.
    #[arg(long, global = true, default_value_t = 32)]
    pub precision: u32,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Coupling document: a path, or inline JSON starting with '{'.
    /// Defaults to homogeneous J = p (J = 4 for p = 2).
    #[arg(long, global = true)]
    pub couplings: Option<String>,
    /// Boundary-field document (path or inline JSON); defaults to h = 0.
    #[arg(long, global = true)]
    pub field: Option<String>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded invariant suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Decide uniqueness or phase transition for the given couplings.
    Classify,
    /// Brute-force check that the level-n measure marginalizes to level n - 1.
    CompatCheck,
    /// Per-level extremes of the valuation of the finite-volume measure.
    NormProfile,
}

enum Failure {
    Solver(Error),
    Io(String),
    Verification(u64),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Solver(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Verification(_) | Failure::Io(_) => 1,
            Failure::Solver(e) => match e {
                Error::DomainViolation { .. }
                | Error::InadmissibleCoupling(_)
                | Error::InadmissibleField(_)
                | Error::NotInvertible(_) => 2,
                Error::PrecisionExhausted { .. }
                | Error::DivisionByZero
                | Error::LiftStall { .. }
                | Error::PartitionFunctionDegenerate { .. }
                | Error::DenominatorDegenerate(_) => 3,
                Error::EnumerationTooLarge { .. } => 4,
                Error::NotPrime(_)
                | Error::PrimeMismatch { .. }
                | Error::MissingCoupling(_)
                | Error::InvalidInput(_) => 1,
            },
        }
    }
}

fn config_json(cfg: &RunConfig) -> Value {
    let couplings: Value = serde_json::from_str(&cfg.coupling_source)
        .unwrap_or(Value::String(cfg.coupling_source.clone()));
    json!({
        "p": cfg.prime.value(),
        "q": cfg.q,
        "k": cfg.k,
        "n": cfg.n,
        "precision": cfg.tolerance.precision,
        "couplings": couplings,
        "field": if cfg.field.is_some() { "file" } else { "zero" },
    })
}

fn emit(out: &Option<PathBuf>, report: &impl Serialize) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let common = &cli.common;
    match &cli.command {
        Command::Verify { suite } => {
            Prime::new(common.p)?;
            let report = suites::run(*suite, common.seed)?;
            emit(&common.out, &report)?;
            match report.failed() {
                0 => {
                    eprintln!("verify: all checks passed (seed {})", common.seed);
                    Ok(())
                }
                n => Err(Failure::Verification(n)),
            }
        }
        Command::Classify => {
            let cfg = RunConfig::from_args(common, false)?;
            let report = classify_phase(cfg.k, &cfg.coupling, &cfg.tolerance)?;
            eprintln!("classify: {:?}: {}", report.verdict, report.basis);
            emit(
                &common.out,
                &json!({ "config": config_json(&cfg), "report": report }),
            )
        }
        Command::CompatCheck => {
            let cfg = RunConfig::from_args(common, true)?;
            let shape = cfg.shape()?;
            let report = compatibility_check(
                &cfg.field_or_zero(),
                &cfg.coupling,
                &shape,
                cfg.n,
                cfg.tolerance,
            )?;
            eprintln!(
                "compat-check: {} (discrepancy valuation {}, threshold {})",
                if report.holds { "holds" } else { "fails" },
                report.discrepancy_valuation,
                report.threshold
            );
            emit(
                &common.out,
                &json!({ "config": config_json(&cfg), "report": report }),
            )
        }
        Command::NormProfile => {
            let cfg = RunConfig::from_args(common, true)?;
            let shape = cfg.shape()?;
            let profile = measure_norm_profile(&cfg.field_or_zero(), &cfg.coupling, &shape, cfg.n)?;
            let bounded = profile.iter().all(|l| l.min_valuation.at_least(0));
            eprintln!(
                "norm-profile: {} levels, {}",
                profile.len(),
                if bounded {
                    "bounded"
                } else {
                    "some |μ|_p > 1"
                }
            );
            emit(
                &common.out,
                &json!({ "config": config_json(&cfg), "bounded": bounded, "profile": profile }),
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Keep clap's own usage errors off the solver's exit code 2.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Solver(e) => eprintln!("error: {e}"),
                Failure::Io(msg) => eprintln!("error: {msg}"),
                Failure::Verification(n) => eprintln!("verify: {n} checks failed"),
            }
            ExitCode::from(failure.exit_code())
        }
    }
}
