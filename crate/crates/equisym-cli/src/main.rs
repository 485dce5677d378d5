//! `equisym` — runs verification and training suites for symmetric,
//! equivariant, and anti-symmetric function representations, writing CSV and
//! JSON reports. Exit code 0 means every assertion in the suite held.

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use equisym_cli::config::{resolve, PartialConfig, EXPERIMENTS};
use equisym_cli::experiments::run_experiment;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "equisym", version, about = "Permutation-symmetric function representation suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment suite and write its reports.
    Run(RunArgs),
    /// List the available experiment suites.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// Suite name; see `list`. May also come from the config file.
    #[arg(long)]
    experiment: Option<String>,
    /// Flat JSON config file; flags given here override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Random seed (required for training suites).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the CSV/JSON reports (default: current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of particles.
    #[arg(long)]
    n: Option<usize>,
    /// Dimension per particle.
    #[arg(long)]
    d: Option<usize>,
}

fn run(args: RunArgs) -> Result<bool> {
    let file = match &args.config {
        Some(path) => PartialConfig::from_file(path)?,
        None => PartialConfig::default(),
    };
    let flags = PartialConfig {
        experiment: args.experiment,
        n: args.n,
        d: args.d,
        d_box: None,
        seed: args.seed,
        tolerance: None,
        epochs: None,
        learning_rate: None,
        out: args.out,
    };
    let cfg = resolve(flags.merged_over(file))?;
    let report = run_experiment(&cfg)?;
    let (csv_path, json_path) = report.write(&cfg)?;
    println!(
        "{}: {} -> {}, {}",
        cfg.experiment,
        if report.passed { "PASS" } else { "FAIL" },
        csv_path.display(),
        json_path.display()
    );
    Ok(report.passed)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => match run(args) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(err) => {
                eprintln!("error: {err:#}");
                ExitCode::from(2)
            }
        },
        Command::List => {
            for name in EXPERIMENTS {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
    }
}
