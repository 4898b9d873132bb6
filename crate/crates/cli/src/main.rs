use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;

use commands::Paths;
use config::ExperimentConfig;

/// Transform-invariant PCA experiment runner.
#[derive(Parser)]
#[command(name = "gtpca", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate (or load and transform) the train and test datasets.
    Gen(Common),
    /// Fit components on the training set.
    Fit {
        #[command(flatten)]
        common: Common,
        /// Where to write the model; defaults to `<out>/model.gtpc`.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Write ResMSE (and optional accuracy) per component count to metrics.csv.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Write per-sample loadings and reconstructions.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Number of components to use; defaults to all.
        #[arg(long)]
        k: Option<usize>,
        /// Dataset to project; defaults to `<out>/test.gtds`.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), error::CliError> {
    let setup = |common: Common, model: Option<PathBuf>| -> Result<_, error::CliError> {
        let cfg = ExperimentConfig::load(&common.config)?;
        let paths = Paths::new(&cfg, common.out, model);
        Ok((cfg, paths))
    };
    match cli.command {
        Command::Gen(common) => {
            let (cfg, paths) = setup(common, None)?;
            commands::gen(&cfg, &paths)
        }
        Command::Fit { common, model } => {
            let (cfg, paths) = setup(common, model)?;
            commands::fit(&cfg, &paths)
        }
        Command::Eval { common, model } => {
            let (cfg, paths) = setup(common, model)?;
            commands::eval(&cfg, &paths)
        }
        Command::Export {
            common,
            model,
            k,
            dataset,
        } => {
            let (_, paths) = setup(common, model)?;
            commands::export(&paths, k, dataset)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.to_string();
            eprintln!("{}", rendered.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
