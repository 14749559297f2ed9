use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hgf_cli::{cmd_filter, cmd_simulate, cmd_validate, format_significant, CliError, FilterOptions};

/// Hierarchical Gaussian Filter belief networks.
#[derive(Parser)]
#[command(name = "hgf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a network config and print the validation report.
    Validate { config: PathBuf },
    /// Sample ground-truth states and observations from a config.
    Simulate {
        config: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the filter over an input series and write the belief trajectories.
    Filter {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[arg(long)]
        input: PathBuf,
        /// Output file, or a directory when several configs are given.
        #[arg(long)]
        out: PathBuf,
        /// Print the total surprise of all inputs over all trials.
        #[arg(long)]
        sum_surprise: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Validate { config } => {
            let outcome = cmd_validate(&config)?;
            print!("{}", outcome.report);
            Ok(if outcome.valid { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Simulate { config, trials, seed, out } => {
            cmd_simulate(&config, trials as usize, seed, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Filter { configs, input, out, sum_surprise, jobs } => {
            let totals = cmd_filter(&FilterOptions {
                configs: &configs,
                input: &input,
                out: &out,
                jobs,
            })?;
            if sum_surprise {
                if let [(_, total)] = totals.as_slice() {
                    println!("{}", format_significant(*total));
                } else {
                    for (path, total) in &totals {
                        println!("{}\t{}", path.display(), format_significant(*total));
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HGF_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("hgf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
