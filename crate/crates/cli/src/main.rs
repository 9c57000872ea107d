//! `seqgram`: train grammar models on normal logs and rank questionable
//! sequences by how much they grow the grammar.

mod commands;
mod input;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use seqgram_core::InputFormat;

#[derive(Parser)]
#[command(
    name = "seqgram",
    version,
    about = "Grammar-compression anomaly detection for logs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a model from normal sequences
    Train {
        /// Where to write the model
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        /// Print training throughput
        #[arg(long)]
        timing: bool,
    },
    /// Score questionable sequences against a model
    Score {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        /// Report this many sequences with the largest information quantity
        #[arg(long = "top-i", value_name = "M1", default_value_t = 10)]
        top_i: usize,
        /// Report this many sequences with the largest density
        #[arg(long = "top-d", value_name = "M2", default_value_t = 10)]
        top_d: usize,
        /// Tab-separated records instead of a table
        #[arg(long)]
        machine: bool,
        /// Scoring worker threads
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Print scoring throughput
        #[arg(long)]
        timing: bool,
    },
    /// Write a synthetic normal set, questionable set and ground truth
    Synth {
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Automaton description file; a random automaton is used without it
        #[arg(long, conflicts_with_all = ["states", "alphabet"])]
        automaton: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        states: usize,
        #[arg(long, default_value_t = 50)]
        alphabet: usize,
        /// Normal sequences, and normal sequences in the questionable set
        #[arg(long, default_value_t = 500)]
        count: usize,
        /// Foreign-alphabet sequences added to the questionable set
        #[arg(long, default_value_t = 0)]
        anomalies: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a model's rules depth-first from the start rule
    Inspect {
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Args)]
struct InputArgs {
    /// How input files are split into sequences
    #[arg(long, default_value_t = InputFormat::BlankLine)]
    format: InputFormat,
    /// Substring of the line that opens a span (marker format)
    #[arg(long)]
    start: Option<String>,
    /// Substring of the line that closes a span (marker format)
    #[arg(long)]
    end: Option<String>,
    /// Ignore lines containing this substring
    #[arg(long)]
    exclude: Vec<String>,
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

/// Failure class, mapped onto the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Usage = 1,
    Data = 2,
    Integrity = 3,
}

struct Failure {
    class: Class,
    error: anyhow::Error,
}

impl Failure {
    fn usage(msg: impl fmt::Display) -> Self {
        Self {
            class: Class::Usage,
            error: anyhow::anyhow!("{msg}"),
        }
    }

    fn data(error: impl Into<anyhow::Error>) -> Self {
        Self {
            class: Class::Data,
            error: error.into(),
        }
    }

    /// Data error, unless the core error says the model file is corrupt.
    fn from_core(error: seqgram_core::Error, context: impl fmt::Display) -> Self {
        let class = if error.is_integrity() {
            Class::Integrity
        } else {
            Class::Data
        };
        Self {
            class,
            error: anyhow::Error::new(error).context(context.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Train {
            model,
            input,
            timing,
        } => commands::train(&model, &input, timing),
        Command::Score {
            model,
            input,
            top_i,
            top_d,
            machine,
            threads,
            timing,
        } => commands::score(
            &model,
            &input,
            commands::ScoreOptions {
                top_i,
                top_d,
                machine,
                threads,
                timing,
            },
        ),
        Command::Synth {
            out,
            automaton,
            states,
            alphabet,
            count,
            anomalies,
            seed,
        } => commands::synth(
            &out,
            automaton.as_deref(),
            states,
            alphabet,
            count,
            anomalies,
            seed,
        ),
        Command::Inspect { model } => commands::inspect(&model),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Class::Usage as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.class as u8)
        }
    }
}
