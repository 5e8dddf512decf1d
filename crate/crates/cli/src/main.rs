use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qgan_core::harness::{
    emit_csv, run_experiment, summarize, summary_csv, ExperimentConfig, Overrides,
};
use qgan_core::Error;

/// Run a named adversarial-training experiment and write its per-turn
/// metrics as CSV.
#[derive(Debug, Parser)]
#[command(name = "qgan", version)]
struct Args {
    /// TOML configuration file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,

    /// bloch-limit-cycle, pure-convergence, mixed-limit-cycle, mixed-omd or
    /// convex-compare.
    #[arg(long)]
    experiment: Option<String>,

    /// Run a single seed instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    turns: Option<usize>,

    /// Run a single target purity instead of the configured list.
    #[arg(long)]
    purity: Option<f64>,

    /// gda, adam or omd.
    #[arg(long)]
    optimizer: Option<String>,

    #[arg(long = "lr-d")]
    lr_d: Option<f64>,

    #[arg(long = "lr-g")]
    lr_g: Option<f64>,

    /// CSV destination; the summary goes to stdout either way.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: Args) -> Result<(), Error> {
    let overrides = Overrides {
        experiment: args.experiment,
        seed: args.seed,
        turns: args.turns,
        purity: args.purity,
        optimizer: args.optimizer,
        lr_d: args.lr_d,
        lr_g: args.lr_g,
        out: args.out,
    };
    let config = ExperimentConfig::load(args.config.as_deref(), &overrides)?;
    let records = run_experiment(&config)?;
    if let Some(path) = &config.output {
        emit_csv(&records, path)?;
    }
    print!("{}", summary_csv(&summarize(config.experiment, &records)));
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Io { .. }) => {
            eprintln!("qgan: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("qgan: {e}");
            ExitCode::from(1)
        }
    }
}
