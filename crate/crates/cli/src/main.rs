//! `xgewfi` command line: generate datasets and score imputation or augmentation runs.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use xgewfi::pipeline::{write_generated, EvaluationMode, RunOutcome};
use xgewfi::report::json::SCHEMA_VERSION;
use xgewfi::{DatasetKind, Error, Result};

use config::{generator_config, resolve, GeneratorArgs, PipelineArgs, Source};

#[derive(Debug, Parser)]
#[command(name = "xgewfi", about = "Feature-importance weighted evaluation of generated data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic dataset to CSV
    Generate {
        /// regression or classification
        #[arg(long)]
        kind: DatasetKind,
        #[command(flatten)]
        generator: GeneratorArgs,
        /// Master seed, used as random_state unless that is given
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Evaluate a CSV dataset (last column is the target)
    Evaluate {
        csv: PathBuf,
        #[arg(long)]
        kind: Option<DatasetKind>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Generate a dataset in memory and evaluate it
    Run {
        #[arg(long)]
        kind: Option<DatasetKind>,
        #[command(flatten)]
        generator: GeneratorArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Print crate and report schema versions
    Version,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.category().exit_code())
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Generate {
            kind,
            generator,
            seed,
            output,
        } => {
            let cfg = generator_config(&generator, None, seed);
            let ds = write_generated(kind, &cfg, &output)?;
            println!(
                "wrote {} rows x {} features to {}",
                ds.n_rows(),
                ds.n_features(),
                output.display()
            );
            Ok(())
        }
        Command::Evaluate {
            csv,
            kind,
            pipeline,
        } => evaluate(Source::Load(csv), kind, &pipeline),
        Command::Run {
            kind,
            generator,
            pipeline,
        } => evaluate(Source::Generate(&generator), kind, &pipeline),
        Command::Version => {
            println!("xgewfi {}", env!("CARGO_PKG_VERSION"));
            println!("report schema {SCHEMA_VERSION}");
            Ok(())
        }
    }
}

fn evaluate(source: Source<'_>, kind: Option<DatasetKind>, args: &PipelineArgs) -> Result<()> {
    let cfg = resolve(source, kind, args)?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(Error::from)?;
    let outcome = xgewfi::run(&cfg)?;
    print!("{}", summary(&outcome, cfg.percent_display));
    println!("reports written to {}", cfg.out_dir.display());
    Ok(())
}

fn summary(outcome: &RunOutcome, percent: bool) -> String {
    let scale = if percent { 100.0 } else { 1.0 };
    let unit = if percent { " %" } else { "" };
    let width = outcome
        .feature_names
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max("feature".len());
    let mut out = String::new();
    for eval in &outcome.evaluations {
        let label = match eval.mode {
            EvaluationMode::Imputation => "imputation",
            EvaluationMode::Augmentation => "augmentation",
        };
        out.push_str(&format!("\n[{label}]\n"));
        out.push_str(&format!(
            "{:<width$}  {:>10}  {:>10}  {:>12}\n",
            "feature", "importance", "ks", "weighted"
        ));
        for s in &eval.scores {
            out.push_str(&format!(
                "{:<width$}  {:>10.4}  {:>10.4}  {:>12.4}\n",
                outcome.feature_names[s.feature],
                s.importance,
                s.ks_error,
                s.weighted_error * scale
            ));
        }
        out.push_str(&format!("KS total error  {:.4}\n", eval.globals.ks_global));
        out.push_str(&format!("xGEWFI          {:.4}{unit}\n", eval.globals.xgewfi * scale));
        let ranking: Vec<&str> = eval
            .ranking
            .iter()
            .map(|&f| outcome.feature_names[f].as_str())
            .collect();
        out.push_str(&format!("ranking         {}\n", ranking.join(" > ")));
    }
    out
}
