//! `textrep`: build knowledge bases of corpus meta-features and
//! representation performance, and recommend representations for new corpora.
//!
//! Exit codes: 0 on success, 2 for invalid input or usage, 1 for anything else.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use textrep_core::seed::DEFAULT_SEED;
use textrep_core::Strategy;

mod commands;

#[derive(Debug, Parser)]
#[command(name = "textrep", version, about = "Meta-learned text representation recommendation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract the 72 meta-features of a corpus file or every corpus in a directory.
    ExtractMeta(ExtractMetaArgs),
    /// Evaluate every representation on every corpus in a directory.
    BuildKb(BuildKbArgs),
    /// Recommend a representation for a new corpus.
    Recommend(RecommendArgs),
    /// Leave-one-out evaluation of the recommendation strategies.
    LooEval(LooEvalArgs),
    /// Rank meta-features by forest Gini importance.
    FeatureImportance(FeatureImportanceArgs),
    /// Compare two meta-feature subsets with a paired t-test.
    CompareSubsets(CompareSubsetsArgs),
    /// Cross-validated accuracy of every representation on one corpus.
    EvalReps(EvalRepsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CorpusArgs {
    /// Corpus file (.jsonl or .csv) or, where accepted, a directory of them.
    #[arg(long)]
    corpus: PathBuf,
    /// Documents kept per category.
    #[arg(long, default_value_t = textrep_core::corpus::DEFAULT_CATEGORY_CAP)]
    cap: usize,
    /// Part-of-speech lexicon replacing the bundled one.
    #[arg(long)]
    pos_lexicon: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ResourceArgs {
    /// Representation registry (JSON); defaults to the built-in grid.
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Category lexicon for the lexicon representation.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Word vectors (text format) for the pretrained embedding representations.
    #[arg(long)]
    vectors: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExtractMetaArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct BuildKbArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    resources: ResourceArgs,
    /// Knowledge-base file to write. Checkpoints go to `<out>.checkpoints/`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = textrep_core::knowledgebase::DEFAULT_FOLDS)]
    folds: usize,
    /// Concurrent cell evaluations; defaults to the number of cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Stop after this many new cells, leaving checkpoints to resume from.
    #[arg(long, hide = true)]
    max_cells: Option<usize>,
}

#[derive(Debug, Args)]
struct RecommendArgs {
    #[arg(long)]
    kb: PathBuf,
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, default_value = "classify")]
    strategy: Strategy,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Also report the cross-validated accuracy of the recommended representation.
    #[arg(long)]
    train: bool,
    #[arg(long, default_value_t = textrep_core::knowledgebase::DEFAULT_FOLDS)]
    folds: usize,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    vectors: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct LooEvalArgs {
    #[arg(long)]
    kb: PathBuf,
    /// Strategies to evaluate; all four when omitted.
    #[arg(long, value_delimiter = ',')]
    strategy: Vec<Strategy>,
    #[arg(long, default_value_t = textrep_core::evaluate::DEFAULT_RUNS)]
    runs: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Meta-feature subset file, one name per line.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Representation ids to report as fixed baselines.
    #[arg(long, value_delimiter = ',')]
    fixed: Vec<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct FeatureImportanceArgs {
    #[arg(long)]
    kb: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = textrep_core::evaluate::DEFAULT_RUNS)]
    runs: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CompareSubsetsArgs {
    #[arg(long)]
    kb: PathBuf,
    /// Subset file, `traditional` or `all`.
    #[arg(long)]
    a: String,
    /// Subset file, `traditional` or `all`.
    #[arg(long)]
    b: String,
    #[arg(long, default_value = "classify")]
    strategy: Strategy,
    #[arg(long, default_value_t = textrep_core::evaluate::DEFAULT_RUNS)]
    runs: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct EvalRepsArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    resources: ResourceArgs,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = textrep_core::knowledgebase::DEFAULT_FOLDS)]
    folds: usize,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let user = e.downcast_ref::<textrep_core::Error>().is_some_and(textrep_core::Error::is_user_error);
            ExitCode::from(if user { 2 } else { 1 })
        }
    }
}
