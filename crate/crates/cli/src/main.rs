//! Scenario runner: loads a JSON configuration, executes one pipeline or
//! verifier, and writes a deterministic JSON report (plus CSV plot data).
//!
//! Exit codes: 0 all checks pass; 1 a check failed (or a warning under
//! `--strict`); 2 configuration or hypothesis error; 3 numerical breakdown.

mod config;
mod report;
mod scenarios;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::ScenarioConfig;
use report::Report;
use scenarios::{run_scenario, RunError};

#[derive(Parser)]
#[command(
    name = "collarext",
    version,
    about = "Constructive collar extensions and their numerical verifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for the report and artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override the sample budget.
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Override the quadrature level budget.
    #[arg(long, global = true)]
    levels: Option<u32>,

    /// Treat warnings as failures.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Extend a collar homeomorphism over the inner hole.
    ExtendCollar,
    /// Extend a doubly-punctured map over the first puncture pair.
    ExtendPunctured,
    /// Extend an identity-outside-a-ball map across the slab construction.
    ExtendIdentity,
    /// Certify bi-Lipschitz and second-derivative integrability behavior.
    VerifyMap,
    /// Sweep the inversion exponent and measure slab separation.
    SweepSlab,
    /// Verify the twist and stereographic chart identities.
    MilnorGlue,
    /// Emit CSV plot data for the shear level curves and pipeline stages.
    PlotData,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::ExtendCollar => "extend-collar",
            Command::ExtendPunctured => "extend-punctured",
            Command::ExtendIdentity => "extend-identity",
            Command::VerifyMap => "verify-map",
            Command::SweepSlab => "sweep-slab",
            Command::MilnorGlue => "milnor-glue",
            Command::PlotData => "plot-data",
        }
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = Cli::parse();
    let scenario = cli.command.name();

    let config_path = match &cli.config {
        Some(p) => p.clone(),
        None => {
            eprintln!("error: --config <path> is required");
            return 2;
        }
    };
    let config_bytes = match std::fs::read(&config_path) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return 2;
        }
    };
    let mut cfg: ScenarioConfig = match serde_json::from_slice(&config_bytes) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: invalid configuration: {e}");
            return 2;
        }
    };
    if let Err(e) = cfg.validate() {
        eprintln!("error: invalid configuration: {e}");
        return 2;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let mut budgets = cfg.budgets();
    if let Some(samples) = cli.samples {
        budgets.samples = samples;
    }
    if let Some(levels) = cli.levels {
        budgets.levels = levels;
    }

    let mut report = Report::new(scenario, &config_bytes, cfg.seed);
    let outcome = run_scenario(scenario, &cfg, &budgets, &mut report, &cli.out);

    match outcome {
        Ok(()) => {
            let failed: Vec<_> = report.checks.iter().filter(|c| !c.pass).collect();
            for c in &report.checks {
                println!(
                    "{} {} [{}]: measured {:.6e}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.anchor,
                    c.measured
                );
            }
            for w in &report.warnings {
                println!("WARN {w}");
            }
            let strict_failure = cli.strict && !report.warnings.is_empty();
            match report.write(&cli.out) {
                Ok(path) => println!("report: {}", path.display()),
                Err(e) => {
                    eprintln!("error: cannot write report: {e}");
                    return 3;
                }
            }
            if !failed.is_empty() || strict_failure {
                1
            } else {
                0
            }
        }
        Err(RunError { exit_code, message }) => {
            eprintln!("error: {message}");
            // Still write what was collected, for diagnosis.
            report.warn(format!("aborted: {message}"));
            let _ = report.write(&cli.out);
            exit_code
        }
    }
}
