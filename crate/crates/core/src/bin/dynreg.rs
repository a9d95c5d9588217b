//! Command-line front end: `simulate`, `verify`, `lowerbound`, `matrices`.
//!
//! Exit codes: 0 when every check passes, 1 on a failed check, 2 on a
//! configuration or input error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dynreg::harness::{
    emit_csv, lowerbound_suite, matrices_suite, run_experiment, verify_suite, write_json, write_summary_csv,
    ScenarioConfig, SuiteReport,
};
use dynreg::Error;

#[derive(Parser)]
#[command(name = "dynreg", version, about = "Dynamic-regret learners, experiments and matrix checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for JSON and CSV artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a scenario file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
        /// Write one record CSV per trial.
        #[arg(long)]
        per_round: bool,
        /// Cross-check against the dense oracle whenever T ≤ 64.
        #[arg(long)]
        oracle_check: bool,
    },
    /// Spectral bounds, rank-one inequalities and the Frobenius condition.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Sign-pattern adversary search and the Rademacher quadratic tail.
    Lowerbound {
        #[command(flatten)]
        common: Common,
        /// Monte Carlo samples for the tail estimate.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Exact identities of the difference and Haar matrices.
    Matrices {
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Check,
    Config(Error),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::Parse(_) => Failure::Config(e),
            other => Failure::Runtime(other),
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(Error::Io { path: dir.into(), source: e }))
}

fn simulate(config: &Path, common: &Common, trials: Option<usize>, per_round: bool, oracle_check: bool) -> Result<(), Failure> {
    let mut cfg = ScenarioConfig::load(config).map_err(|e| match e {
        Error::Io { .. } => Failure::Config(e),
        other => Failure::from(other),
    })?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(t) = trials {
        cfg.trials = t;
    }
    cfg.per_round |= per_round;
    cfg.oracle_check |= oracle_check;
    cfg.validate()?;

    let out = run_experiment(&cfg).map_err(Failure::Runtime)?;
    let rep = &out.report;
    println!("preconditioner {}  d = {}  trials = {}", cfg.preconditioner.label(), cfg.dim, cfg.trials);
    for rung in &rep.rungs {
        for (j, label) in rep.comparator_labels.iter().enumerate() {
            println!(
                "T = {:>6} (padded {:>6})  {:<36} mean R_T = {:>12.4}  bound form = {:>12.4}  c = {:.4}",
                rung.horizon, rung.padded_horizon, label, rung.mean_regret[j], rung.mean_bound_form[j], rung.fitted_c[j]
            );
        }
    }
    for (j, label) in rep.comparator_labels.iter().enumerate() {
        if let Some(e) = rep.growth_exponent[j] {
            println!("{label}: growth exponent {e:.4}, c spread {:.3}", rep.c_spread[j].unwrap_or(f64::NAN));
        }
    }
    for c in &rep.checks {
        println!("{}  {}  {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }

    if let Some(dir) = &common.out {
        ensure_dir(dir)?;
        write_json(rep, &dir.join("report.json")).map_err(Failure::Runtime)?;
        write_summary_csv(rep, &dir.join("summary.csv")).map_err(Failure::Runtime)?;
        std::fs::write(dir.join("config.toml"), cfg.to_toml_string())
            .map_err(|e| Failure::Runtime(Error::Io { path: dir.join("config.toml"), source: e }))?;
        if !out.records.is_empty() {
            let rec_dir = dir.join("records");
            ensure_dir(&rec_dir)?;
            for tr in &out.records {
                let path = rec_dir.join(format!("T{}_trial{}.csv", tr.horizon, tr.trial));
                emit_csv(&tr.records, &path).map_err(Failure::Runtime)?;
            }
        }
    }
    if rep.all_pass() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn finish_suite(rep: SuiteReport, common: &Common) -> Result<(), Failure> {
    print!("{}", rep.table());
    if let Some(dir) = &common.out {
        ensure_dir(dir)?;
        write_json(&rep, &dir.join(format!("{}.json", rep.name))).map_err(Failure::Runtime)?;
    }
    if rep.all_pass() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate {
            config,
            common,
            trials,
            per_round,
            oracle_check,
        } => simulate(config, common, *trials, *per_round, *oracle_check),
        Command::Verify { common } => verify_suite(common.seed.unwrap_or(0)).map_err(Failure::Runtime).and_then(|r| finish_suite(r, common)),
        Command::Lowerbound { common, trials } => lowerbound_suite(common.seed.unwrap_or(0), *trials)
            .map_err(Failure::Runtime)
            .and_then(|r| finish_suite(r, common)),
        Command::Matrices { common } => matrices_suite(common.seed.unwrap_or(0)).map_err(Failure::Runtime).and_then(|r| finish_suite(r, common)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
