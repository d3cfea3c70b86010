use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mellin_sampler_cli::{run, write_outcome, CliError, Command, Overrides, VariantChoice};

/// Exponential sampling, concentration and random sampling experiments for
/// Mellin band-limited functions.
#[derive(Parser)]
#[command(name = "mellin-sampler", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Draw a random band-limited function and measure its concentration.
    Synth(Args),
    /// Run the numerical checks on a stored function.
    Verify(Args),
    /// Monte Carlo test of the random sampling inequality.
    Experiment(Args),
    /// Evaluate the probability and covering bounds on a grid.
    Bounds(Args),
}

#[derive(clap::Args)]
struct Args {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Constant variant(s) to report.
    #[arg(long, value_enum)]
    variant: Option<VariantChoice>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Synth(a) => (Command::Synth, a),
        Sub::Verify(a) => (Command::Verify, a),
        Sub::Experiment(a) => (Command::Experiment, a),
        Sub::Bounds(a) => (Command::Bounds, a),
    };
    match execute(command, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command, args: &Args) -> Result<(), CliError> {
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {threads} threads: {e}")))?;
    }
    let overrides = Overrides { seed: args.seed, variant: args.variant };
    let outcome = run(command, &args.config, &overrides)?;
    write_outcome(&args.out, &outcome)?;
    for line in &outcome.summary {
        println!("{line}");
    }
    if outcome.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(outcome.failures))
    }
}
