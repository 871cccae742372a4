//! `spa`: saddlepoint p-values for sign-flip tests, oracle comparisons,
//! and convergence experiments.
//!
//! Exit codes: 0 success, 2 unreadable/ill-formed input or config,
//! 3 degenerate sample (all observations zero).
//!
//! `SPA_THREADS` caps the worker pool.

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use spa_cli::{
    comparison_json, parse_csv, report_json, run_convergence, CliError, ExperimentConfig,
};
use spa_core::oracle::{compare, exact_enumeration, mc_pvalue, OracleValue, MAX_EXACT_N};
use spa_core::saddle::SaddleConfig;
use spa_core::signflip::spa_pvalue;
use spa_core::{Sample, SpaError};

#[derive(Parser)]
#[command(name = "spa", about = "Saddlepoint approximations for sign-flip resampling tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleKind {
    Exact,
    Mc,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the SPA p-value for a single-column CSV of observations.
    Pvalue {
        /// Input CSV: one value per line, optional header line "x".
        input: String,
    },
    /// Compare the SPA p-value against a resampling oracle.
    Compare {
        input: String,
        #[arg(long, value_enum, default_value = "exact")]
        oracle: OracleKind,
        /// Monte Carlo replicates (mc oracle only).
        #[arg(long, default_value_t = 100_000)]
        b: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the convergence experiment described by a key=value config file.
    Convergence {
        #[arg(long)]
        config: String,
        /// Write the per-replicate CSV here (summary JSON goes to stdout).
        #[arg(long)]
        out: Option<String>,
    },
    /// Quick internal consistency checks.
    Selftest,
}

fn read_sample(path: &str) -> Result<Sample, CliError> {
    let text = fs::read_to_string(path)?;
    parse_csv(&text)
}

fn exit_code_for(err: &CliError) -> u8 {
    match err {
        CliError::Spa(SpaError::DegenerateSample) => 3,
        _ => 2,
    }
}

fn cmd_pvalue(input: &str) -> Result<(), CliError> {
    let sample = read_sample(input)?;
    let report = spa_pvalue(&sample, &SaddleConfig::default())?;
    println!("{}", report_json(&report));
    Ok(())
}

fn cmd_compare(input: &str, oracle: OracleKind, b: u64, seed: u64) -> Result<(), CliError> {
    let sample = read_sample(input)?;
    let report = spa_pvalue(&sample, &SaddleConfig::default())?;
    let oracle = match oracle {
        OracleKind::Exact => {
            if sample.len() > MAX_EXACT_N {
                return Err(CliError::Config(format!(
                    "exact oracle caps n at {MAX_EXACT_N}, got {}; use --oracle mc",
                    sample.len()
                )));
            }
            OracleValue::Exact(exact_enumeration(&sample)?)
        }
        OracleKind::Mc => {
            if b == 0 {
                return Err(CliError::Config("--b must be >= 1".into()));
            }
            OracleValue::Mc(mc_pvalue(&sample, b, seed)?)
        }
    };
    println!("{}", comparison_json(&compare(&report, &oracle)));
    Ok(())
}

fn cmd_convergence(config: &str, out: Option<&str>) -> Result<(), CliError> {
    let text = fs::read_to_string(config)?;
    let cfg = ExperimentConfig::parse(&text)?;
    let report = run_convergence(&cfg)?;
    match out {
        Some(path) => fs::write(path, report.to_csv())?,
        None => print!("{}", report.to_csv()),
    }
    println!("{}", report.summary_json());
    Ok(())
}

fn cmd_selftest() -> Result<(), CliError> {
    let checks: Vec<(&str, bool)> = vec![
        ("normal_sf(0) = 1/2", spa_core::normal_sf(0.0).value() == 0.5),
        ("mills_scaled(0) = 1/2", spa_core::mills_scaled(0.0).value() == 0.5),
        (
            "w = 0 convention gives p = 1/2",
            spa_pvalue(
                &Sample::new(vec![1.0, -1.0]).unwrap(),
                &SaddleConfig::default(),
            )?
            .p_lr
            .value()
                == 0.5,
        ),
        (
            "exact enumeration of (1,2,3) = 1/8",
            exact_enumeration(&Sample::new(vec![1.0, 2.0, 3.0]).unwrap())?.p() == 0.125,
        ),
        (
            "mc oracle is deterministic",
            mc_pvalue(&Sample::new(vec![1.0, 2.0]).unwrap(), 1000, 7)?
                == mc_pvalue(&Sample::new(vec![1.0, 2.0]).unwrap(), 1000, 7)?,
        ),
    ];
    let mut ok = true;
    for (name, passed) in checks {
        println!("{}: {}", name, if passed { "ok" } else { "FAILED" });
        ok &= passed;
    }
    if ok {
        Ok(())
    } else {
        Err(CliError::Config("selftest failed".into()))
    }
}

fn main() -> ExitCode {
    let threads = std::env::var("SPA_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    spa_core::init_threads(threads);

    let cli = Cli::parse();
    let result = match cli.command {
        Command::Pvalue { input } => cmd_pvalue(&input),
        Command::Compare { input, oracle, b, seed } => cmd_compare(&input, oracle, b, seed),
        Command::Convergence { config, out } => cmd_convergence(&config, out.as_deref()),
        Command::Selftest => cmd_selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
