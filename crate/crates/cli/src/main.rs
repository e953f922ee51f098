use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fermifisher::checks;
use fermifisher_cli::config::load_config;
use fermifisher_cli::{dump, sweep, CliError};

#[derive(Parser)]
#[command(
    name = "fermifisher",
    version,
    about = "Quantum Fisher information for fermionic Gaussian states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a parameter grid described by a JSON run configuration.
    Run {
        /// Path to the run configuration (JSON).
        config: PathBuf,
    },
    /// Cross-validate closed-form results against the dense oracle on
    /// randomized instances.
    Check {
        /// Mode count n (dense oracle supports 1..=6).
        #[arg(long)]
        modes: usize,
        /// Number of randomized instances.
        #[arg(long)]
        trials: usize,
        /// Base seed; every reported deviation carries the instance seed
        /// that reproduces it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Dump the SLD coefficients (K, η) at one parameter point.
    #[command(name = "sld-dump")]
    SldDump {
        /// Path to the run configuration (JSON); its output_path receives
        /// the dump.
        config: PathBuf,
        /// Comma-separated parameter values, e.g. --point 0.1,0.2
        #[arg(long)]
        point: String,
        /// Include the dense SLD spectrum and eigenbasis (n ≤ 6).
        #[arg(long, default_value_t = false)]
        dense: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config } => {
            let cfg = load_config(&config)?;
            let outcome = sweep::run(&cfg)?;
            println!(
                "wrote {} row(s) to {}",
                outcome.rows,
                outcome.output_path.display()
            );
            Ok(())
        }
        Command::Check {
            modes,
            trials,
            seed,
        } => run_check(modes, trials, seed),
        Command::SldDump {
            config,
            point,
            dense,
        } => {
            let cfg = load_config(&config)?;
            let values = parse_point(&point)?;
            let path = dump::sld_dump(&cfg, &values, dense)?;
            println!("wrote SLD dump to {}", path.display());
            Ok(())
        }
    }
}

fn parse_point(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Config(format!("bad point value '{s}': {e}")))
        })
        .collect()
}

fn run_check(modes: usize, trials: usize, seed: u64) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    if modes == 0 || modes > fermifisher::oracle::N_MAX {
        return Err(CliError::Config(format!(
            "modes must be in 1..={}",
            fermifisher::oracle::N_MAX
        )));
    }
    let outcomes = checks::run_checks(modes, trials, seed)
        .map_err(|e| CliError::Config(e.to_string()))?;

    println!("check results: n = {modes}, trials = {trials}, seed = {seed}");
    println!(
        "{:<34} {:>14} {:>12} {:>20} {:>6}",
        "check", "max deviation", "tolerance", "worst instance seed", "result"
    );
    let mut violations = 0usize;
    for o in &outcomes {
        let ok = o.passed();
        if !ok {
            violations += 1;
        }
        println!(
            "{:<34} {:>14.3e} {:>12.1e} {:>20} {:>6}",
            o.name,
            o.max_deviation,
            o.tolerance,
            o.worst_seed,
            if ok { "pass" } else { "FAIL" }
        );
    }
    if violations > 0 {
        return Err(CliError::CheckFailed { violations });
    }
    println!("all {} checks passed", outcomes.len());
    Ok(())
}
