mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::RunArgs;

/// Multi-label document indexing: nearest-neighbor label ranking and
/// term-concept association classifiers.
#[derive(Debug, Parser)]
#[command(name = "semdex", version)]
pub struct Cli {
    /// Flat `key = value` file with defaults; flags and environment win
    #[arg(long, global = true, env = "SEMDEX_CONFIG")]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores); results do not depend on it
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Only log warnings and errors
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the TF.IDF vector index of a labeled corpus
    BuildIndex {
        #[command(flatten)]
        run: RunArgs,
        /// Where to write the index (defaults to --index)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Train a label ranker on the indexed corpus
    Train {
        #[command(flatten)]
        run: RunArgs,
        /// Trees in the random forest
        #[arg(long, default_value_t = 100)]
        trees: usize,
        /// Where to write the model (defaults to --model)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Predict labels for new documents
    Classify {
        #[command(flatten)]
        run: RunArgs,
        /// Documents to classify (JSON Lines)
        #[arg(long)]
        input: PathBuf,
        /// Prediction file to write (JSON Lines)
        #[arg(long)]
        output: PathBuf,
        /// Drop a document's own index entry from its neighbors
        #[arg(long)]
        exclude_self: bool,
    },
    /// Score a prediction file against gold labels
    Evaluate {
        /// Corpus holding the gold labels
        #[arg(long)]
        gold: PathBuf,
        /// Prediction file
        #[arg(long)]
        predictions: PathBuf,
        /// Write the report as JSON here as well
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build term-concept association vectors from a labeled corpus
    EsaBuild {
        #[command(flatten)]
        run: RunArgs,
        /// Ignore terms in fewer documents than this
        #[arg(long, default_value_t = semdex::esa::DEFAULT_MIN_DOC_FREQ)]
        min_df: usize,
        /// Terms kept per concept
        #[arg(long, default_value_t = semdex::esa::DEFAULT_VECTOR_CAP)]
        cap: usize,
        /// Association file to write
        #[arg(long)]
        output: PathBuf,
    },
    /// Rank concepts for new documents by association relevance
    EsaClassify {
        /// Association file from esa-build
        #[arg(long)]
        assoc: PathBuf,
        /// Documents to classify (JSON Lines)
        #[arg(long)]
        input: PathBuf,
        /// Prediction file to write (JSON Lines)
        #[arg(long)]
        output: PathBuf,
        /// Labels per document: "gold" (each document's own count) or a number
        #[arg(long, default_value = "gold")]
        labels: String,
    },
    /// Run the comparison harness
    Bench {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = Suite::Synthetic)]
        suite: Suite,
        /// Training documents to generate
        #[arg(long, default_value_t = 2000)]
        train_docs: usize,
        /// Test documents to generate
        #[arg(long, default_value_t = 500)]
        test_docs: usize,
        /// Trees in the random forest
        #[arg(long, default_value_t = 100)]
        trees: usize,
        /// Directory for report.json, report.txt and prediction files
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Planted-topic synthetic corpus
    Synthetic,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    if let Some(n) = cli.threads {
        if n == 0 {
            commands::usage_error("--threads must be at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
