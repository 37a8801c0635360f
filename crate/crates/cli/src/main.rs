use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

/// Learn column-name embeddings from SQL schemas and suggest table names.
#[derive(Parser, Debug)]
#[command(name = "c2v", version, arg_required_else_help = true)]
struct Cli {
    /// More log output (-v info, -vv debug, -vvv trace)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract CREATE TABLE schemas from SQL files into a corpus file
    Extract(ExtractArgs),
    /// Drop test and dummy schemas from a corpus
    Clean(CleanArgs),
    /// Train embeddings and build the table-name index
    Train(TrainArgs),
    /// Suggest table names for a set of columns
    Suggest(SuggestArgs),
    /// Split a concatenated name into words
    Split(SplitArgs),
    /// Shuffle a corpus and split it into training and test files
    SplitDataset(SplitDatasetArgs),
    /// WordNet path similarity between two words
    Wnsim(WnsimArgs),
    /// Score predictions on a test corpus with fuzzy F1
    Eval(EvalArgs),
    /// Run extract, clean, split, train and eval from one config file
    Pipeline(PipelineArgs),
}

#[derive(Args, Debug)]
struct ExtractArgs {
    /// SQL files to read; standard input when none are given
    inputs: Vec<PathBuf>,
    /// Corpus file to write; standard output when omitted
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CleanArgs {
    /// Corpus file to clean
    #[arg(short, long)]
    input: PathBuf,
    /// Cleaned corpus file
    #[arg(short, long)]
    output: PathBuf,
    /// Reject a name when at least this fraction of its trigrams occur only once
    #[arg(long, default_value_t = 0.5)]
    rare_trigram_fraction: f64,
    /// Reject a name when more than this fraction of its characters are digits
    #[arg(long, default_value_t = 0.3)]
    digit_fraction: f64,
    /// Write one "name<TAB>rule" line per rejected schema
    #[arg(long)]
    rejections: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct HyperParams {
    #[arg(long, default_value_t = 100)]
    dim: usize,
    /// Maximum context offset
    #[arg(long, default_value_t = 5, conflicts_with = "window_full")]
    window: usize,
    /// Use the whole document as the context window
    #[arg(long)]
    window_full: bool,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[arg(long = "lr", default_value_t = 0.05)]
    learning_rate: f64,
    #[arg(long, default_value_t = 5)]
    negatives: usize,
    #[arg(long, default_value_t = 3)]
    ngram_min: usize,
    #[arg(long, default_value_t = 6)]
    ngram_max: usize,
    /// Number of subword hash buckets
    #[arg(long, default_value_t = 2_000_000)]
    bucket: u32,
    #[arg(long, default_value_t = 1)]
    min_count: u64,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Training corpus file
    #[arg(long)]
    corpus: PathBuf,
    /// Model file to write
    #[arg(long)]
    model: PathBuf,
    /// Index file to write (defaults to the model path with extension .c2i)
    #[arg(long)]
    index: Option<PathBuf>,
    #[command(flatten)]
    params: HyperParams,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads; 1 gives bit-reproducible models
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args, Debug)]
struct SuggestArgs {
    #[arg(long)]
    model: PathBuf,
    /// Defaults to the model path with extension .c2i
    #[arg(long)]
    index: Option<PathBuf>,
    /// Comma-separated column names
    #[arg(long, value_delimiter = ',', required = true)]
    columns: Vec<String>,
    #[arg(short, long, default_value_t = 1)]
    k: usize,
}

#[derive(Args, Debug)]
struct SplitArgs {
    /// Word list, one word per line, most frequent first (defaults to the bundled list)
    #[arg(long)]
    lexicon: Option<PathBuf>,
    name: String,
}

#[derive(Args, Debug)]
struct SplitDatasetArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value_t = 0.9)]
    fraction: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct WordNetArg {
    /// Directory holding the WordNet 3.0 database files
    #[arg(long, env = "C2V_WORDNET_DIR")]
    wordnet_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WnsimArgs {
    word1: String,
    word2: String,
    #[command(flatten)]
    wordnet: WordNetArg,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Defaults to the model path with extension .c2i
    #[arg(long)]
    index: Option<PathBuf>,
    /// Test corpus file
    #[arg(long)]
    test: PathBuf,
    #[arg(short, long, default_value_t = 1)]
    k: usize,
    /// Directory for results.tsv, cdf.tsv and summary.txt
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[command(flatten)]
    wordnet: WordNetArg,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    /// Config file of "key = value" lines
    #[arg(long)]
    config: PathBuf,
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    init_logging(cli.verbose);

    let result = match cli.command {
        Command::Extract(a) => commands::extract(&a.inputs, a.output.as_deref()),
        Command::Clean(a) => commands::clean(&a),
        Command::Train(a) => commands::train(&a),
        Command::Suggest(a) => commands::suggest(&a),
        Command::Split(a) => commands::split(&a),
        Command::SplitDataset(a) => commands::split_dataset(&a),
        Command::Wnsim(a) => commands::wnsim(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Pipeline(a) => commands::pipeline(&a.config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<commands::UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
