use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use indef_entropy_core::scenario::{run_scenario, Experiment, Scenario};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Verb {
    /// Identity and property suite.
    Check,
    /// Interpolation, entropy identities and the outer-function check.
    Solve,
    /// Determinant-ratio limit experiment.
    Szego,
    /// Print a scenario for the given seed.
    Gen,
    /// Every experiment listed in the scenario.
    Run,
}

/// Indefinite Carathéodory interpolation, entropy and Szegő limit experiments.
#[derive(Debug, Parser)]
#[command(name = "indef-entropy", version)]
struct Cli {
    verb: Verb,
    /// Scenario JSON file; without it a generated instance (p = 1, n = 3, one negative eigenvalue) is used.
    #[arg(long, value_name = "FILE")]
    scenario: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory for report.json and the CSV files.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long = "i-max", value_name = "N")]
    i_max: Option<usize>,
    #[arg(long = "tol-quadrature", value_name = "X")]
    tol_quadrature: Option<f64>,
    #[arg(long = "tol-conv", value_name = "X")]
    tol_conv: Option<f64>,
}

fn load(cli: &Cli) -> Result<Scenario, String> {
    let mut s = match &cli.scenario {
        Some(path) => Scenario::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?,
        None => Scenario::generated(1, 1, 3, 1),
    };
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    if let Some(i) = cli.i_max {
        s.i_max = i;
    }
    if let Some(t) = cli.tol_quadrature {
        s.tolerances.quadrature = t;
    }
    if let Some(t) = cli.tol_conv {
        s.tolerances.conv = t;
    }
    match cli.verb {
        Verb::Check => s.experiments = vec![Experiment::IdentitySuite],
        Verb::Solve => {
            s.experiments = vec![
                Experiment::Interpolation,
                Experiment::EntropyIdentity,
                Experiment::OuterCheck,
            ]
        }
        Verb::Szego => s.experiments = vec![Experiment::Szego],
        Verb::Gen | Verb::Run => {}
    }
    Ok(s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let scenario = match load(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Verb::Gen = cli.verb {
        match serde_json::to_string_pretty(&scenario) {
            Ok(text) => {
                println!("{text}");
                return ExitCode::SUCCESS;
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    }
    let outcome = match run_scenario(&scenario, cli.out.as_deref()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = &outcome.report;
    if let Some(e) = &report.setup_error {
        println!("setup failed: {e}");
    }
    for r in &report.experiments {
        let name = serde_json::to_value(r.experiment)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        println!("{name}: {}", if r.passed { "PASS" } else { "FAIL" });
        if let Some(e) = &r.error {
            println!("  error: {e}");
        }
        for c in &r.checks {
            println!(
                "  {} {} = {:.3e} (tolerance {:.1e})",
                if c.passed { "ok  " } else { "FAIL" },
                c.name,
                c.value,
                c.tolerance
            );
        }
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
