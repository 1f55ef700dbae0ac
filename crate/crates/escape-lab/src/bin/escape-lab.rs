//! Config-driven experiment runner.
//!
//! `escape-lab run --config exp.toml [--out dir] [--threads N] [--plot-data]`
//! executes one experiment and writes CSV artifacts plus a manifest;
//! `escape-lab validate --config exp.toml` checks the config and prints
//! diagnostics without running anything. Exit codes: 0 success, 2 config
//! error, 3 numeric error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use escape_lab::config::ExperimentConfig;
use escape_lab::error::Error;
use escape_lab::runner;

#[derive(Parser)]
#[command(name = "escape-lab", version, about = "Escape-time and convergence experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment description (TOML).
    #[arg(long)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the experiment and write artifacts.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Output directory (default `out`, or $ESCAPE_LAB_OUT).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cap the worker-thread count; does not affect results.
        #[arg(long)]
        threads: Option<usize>,
        /// Additionally emit pre-pivoted plot series files.
        #[arg(long)]
        plot_data: bool,
    },
    /// Check the config and print diagnostics without running.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            common,
            out,
            threads,
            plot_data,
        } => {
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| Error::Argument(format!("cannot set thread count: {e}")))?;
            }
            let out_dir = out
                .or_else(|| std::env::var_os("ESCAPE_LAB_OUT").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            let config = ExperimentConfig::load(&common.config)?;
            let manifest = runner::run(&config, &out_dir, plot_data)?;
            println!("wrote {} artifacts to {}", manifest.artifacts.len(), out_dir.display());
            for name in &manifest.artifacts {
                println!("  {name}");
            }
            Ok(())
        }
        Command::Validate { common } => {
            let config = ExperimentConfig::load(&common.config)?;
            let notes = config.validate()?;
            println!(
                "config ok: kind = {}, fingerprint = {}",
                config.experiment.kind.as_str(),
                config.fingerprint()?
            );
            for note in notes {
                println!("note: {note}");
            }
            Ok(())
        }
    }
}
