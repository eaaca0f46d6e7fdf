use std::process::ExitCode;

use clap::{Parser, Subcommand};

use entail_cli::generate::GenerateArgs;
use entail_cli::prove::ProveArgs;
use entail_cli::train::{EvalArgs, TrainArgs};
use entail_cli::zeroshot::ZeroshotArgs;
use entail_cli::{generate, prove, train, zeroshot, CliError};

/// Entailment datasets for a small quantified language, and recurrent
/// classifiers trained on them.
#[derive(Parser)]
#[command(name = "entail", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample and label a train/test split.
    Generate(GenerateArgs),
    /// Label one sentence pair.
    Prove(ProveArgs),
    /// Train one or more classifiers.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a dataset file.
    Eval(EvalArgs),
    /// Evaluate a checkpoint on test pairs with substituted words.
    Zeroshot(ZeroshotArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(a) => generate::run(&a),
        Command::Prove(a) => {
            print!("{}", prove::run(&a)?);
            Ok(())
        }
        Command::Train(a) => {
            let results = train::run(&a)?;
            print!("{}", train::summary_tsv(a.model, &results));
            Ok(())
        }
        Command::Eval(a) => {
            let c = train::run_eval(&a)?;
            println!("accuracy\t{:.2}", 100.0 * c.accuracy());
            Ok(())
        }
        Command::Zeroshot(a) => {
            print!("{}", zeroshot::results_tsv(&zeroshot::run(&a)?));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
