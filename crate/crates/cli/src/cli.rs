use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::StageName;

#[derive(Debug, Parser)]
#[command(name = "taxonomy-forge", version, about = "Corpus curation and taxonomy evaluation over JSON-lines records")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact and/or near-duplicate removal.
    Dedup(DedupArgs),
    /// Compute quality signals, optionally applying the keep/reject rules.
    Signals(SignalsArgs),
    /// Keep records matching a preset or filter expression.
    Filter(FilterArgs),
    /// Drop records sharing n-grams with an evaluation set, or build the
    /// evaluation filter with --build.
    Decontam(DecontamArgs),
    /// Agreement, redundancy and recall reports.
    Metrics(MetricsArgs),
    /// Beginning/middle/end subsampling of long documents.
    Chunk(ChunkArgs),
    /// Run the stage list from a config file.
    Run(RunArgs),
}

/// Flags shared by every record-processing command.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Input records (JSON lines); `-` or absent reads standard input.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Output path; `-` or absent writes standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// TOML config; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: available cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Also write the JSON report to this path.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Records per batch.
    #[arg(long)]
    pub batch_size: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DedupMode {
    Exact,
    Near,
    Both,
}

#[derive(Debug, Args)]
pub struct DedupArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "both")]
    pub mode: DedupMode,
    #[arg(long)]
    pub bands: Option<usize>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub shingle_width: Option<usize>,
    /// Confirm candidate pairs with exact shingle Jaccard at this threshold.
    #[arg(long)]
    pub verify: Option<f64>,
    /// Dotted record path; documents with different values never cluster.
    #[arg(long)]
    pub group_field: Option<String>,
    /// Directory for spilled band keys and spooled input.
    #[arg(long)]
    pub shuffle_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SignalsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Bad-word list, one phrase per line.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Lowercase words before n-gram statistics.
    #[arg(long)]
    pub case_fold: bool,
    /// Drop documents rejected by the quality rules.
    #[arg(long)]
    pub apply_rules: bool,
    /// Treat a missing English score as passing the English rule.
    #[arg(long)]
    pub keep_missing_english: bool,
}

#[derive(Debug, Clone, Args)]
pub struct Selection {
    /// Named dataset filter, e.g. top-math.
    #[arg(long, conflicts_with = "filter_expr")]
    pub preset: Option<String>,
    /// Filter expression text.
    #[arg(long)]
    pub filter_expr: Option<String>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub selection: Selection,
}

#[derive(Debug, Args)]
pub struct DecontamArgs {
    #[command(flatten)]
    pub common: Common,
    /// Serialized n-gram filter (read, or written with --build).
    #[arg(long)]
    pub bloom: Option<PathBuf>,
    /// Build the filter from the input records instead of filtering.
    #[arg(long)]
    pub build: bool,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub target_fp: Option<f64>,
    /// Matching n-gram windows needed to drop a document.
    #[arg(long)]
    pub hit_threshold: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ChunkArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub max_chars: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    /// Stage list, overriding the config's `stages`.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub stages: Option<Vec<StageName>>,
    #[arg(long)]
    pub shuffle_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[command(subcommand)]
    pub mode: MetricsMode,
}

#[derive(Debug, Subcommand)]
pub enum MetricsMode {
    /// Candidate-vs-gold kappa per category. --input holds the candidate's
    /// annotations and --gold is given twice.
    Kappa(KappaArgs),
    /// NMI between categories, or of a single count table.
    Nmi(NmiArgs),
    /// Domain recall and kept fraction of a filter.
    Recall(RecallArgs),
}

#[derive(Debug, Args)]
pub struct KappaArgs {
    #[command(flatten)]
    pub common: Common,
    /// Gold annotation files (exactly two).
    #[arg(long, num_args = 1, required = true)]
    pub gold: Vec<PathBuf>,
    /// Comma-separated categories (default: all twelve).
    #[arg(long, value_delimiter = ',')]
    pub categories: Option<Vec<String>>,
    /// Ignore empty annotations when fitting annotator models.
    #[arg(long)]
    pub drop_empty: bool,
    /// Fit label distributions on primary labels only.
    #[arg(long)]
    pub primary_only: bool,
}

#[derive(Debug, Args)]
pub struct NmiArgs {
    #[command(flatten)]
    pub common: Common,
    /// JSON count matrix such as [[2,0],[0,2]] instead of records.
    #[arg(long, conflicts_with = "input")]
    pub table: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub categories: Option<Vec<String>>,
    /// Categories left out of the mean (default: doc_type_v2, fdc levels 1 and 2).
    #[arg(long, value_delimiter = ',')]
    pub exclude: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct RecallArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub selection: Selection,
    /// Gold URL prefixes, one per line, or @math / @web-code for the bundled lists.
    #[arg(long)]
    pub gold: String,
}
