use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use sortkd::{TransformKind, TransformSpec};
use sortkd_cli::bench::{format_bench, run_bench, BenchOptions};
use sortkd_cli::inspect::{cmd_inspect, InspectOptions};
use sortkd_cli::train::cmd_train;
use sortkd_cli::transform::cmd_transform;
use sortkd_cli::verify::{cmd_verify, VerifyOptions};
use sortkd_cli::CliError;

/// Sort and swap pre-processing of teacher logits for knowledge distillation.
///
/// Exit status: 0 on success, 1 on invalid input or failed checks, 2 on I/O errors.
#[derive(Parser)]
#[command(name = "sortkd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rewrite a JSONL logit file with each record's logits transformed.
    Transform {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// identity, swap or sort
        #[arg(long, default_value = "sort")]
        mode: TransformKind,
        /// Z-score the transformed logits.
        #[arg(long)]
        standardize: bool,
    },
    /// Top-k softmax confidences per record plus misclassification counts.
    Inspect {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, default_value_t = 5)]
        top: usize,
        /// Also print label-by-prediction counts.
        #[arg(long)]
        confusion: bool,
        /// Print only the aggregate lines.
        #[arg(long)]
        summary: bool,
    },
    /// Check the sort transform against the iterated-swap oracle.
    Verify {
        /// Largest class count for the exhaustive check (2..=7).
        #[arg(long, default_value_t = 6)]
        cmax: usize,
        /// Number of randomized cases.
        #[arg(long, default_value_t = 100_000)]
        random: usize,
        /// Largest class count for randomized cases.
        #[arg(long, default_value_t = 64)]
        random_classes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a distillation experiment grid from a TOML or JSON config.
    Train {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Override the dataset seed from the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Per-record timing of identity, swap, sort and swap++.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
        classes: Vec<usize>,
        /// Records per transform. swap++ is quadratic in C, so large C
        /// with many records takes minutes.
        #[arg(long, default_value_t = 10_000)]
        records: usize,
        /// Timed repetitions; the best one is reported.
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Transform {
            input,
            out: output,
            mode,
            standardize,
        } => {
            let stats = cmd_transform(&input, &output, TransformSpec::new(mode, standardize))?;
            eprintln!("transformed {} records", stats.records);
        }
        Command::Inspect {
            input,
            top,
            confusion,
            summary,
        } => {
            let opts = InspectOptions {
                top,
                confusion,
                summary_only: summary,
            };
            cmd_inspect(&input, opts, &mut out)?;
        }
        Command::Verify {
            cmax,
            random,
            random_classes,
            seed,
        } => {
            let opts = VerifyOptions {
                cmax,
                random_cases: random,
                random_classes,
                seed,
            };
            if !cmd_verify(opts, &mut out)?.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Train { config, out: dir, seed } => {
            cmd_train(&config, &dir, seed, &mut out)?;
        }
        Command::Bench {
            classes,
            records,
            reps,
            seed,
        } => {
            let rows = run_bench(&BenchOptions {
                classes,
                records,
                reps,
                seed,
            })?;
            write!(out, "{}", format_bench(&rows)).map_err(|e| CliError::io("<stdout>", e))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
