use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "resegment",
    version,
    about = "Boundary projection, resegmented scoring, segmentation and augmentation for speech translation corpora"
)]
pub struct Cli {
    /// Pipeline configuration file (TOML). Defaults to $RESEGMENT_CONFIG when set.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Table)]
    pub format: ReportFormat,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    /// Aligned human-readable table.
    Table,
    /// One JSON record per line.
    Jsonl,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Strip or keep punctuation, case and symbols in documents.
    Normalize(NormalizeArgs),
    /// Re-segment documents with one strategy.
    Segment(SegmentArgs),
    /// Project the boundaries of SOURCE onto the tokens of TARGET.
    Project(ProjectArgs),
    /// Write Gold, System, Recognition-error and Segmentation-error variants.
    Variants(VariantsArgs),
    /// Merge adjacent bitext pairs into cross-boundary training examples.
    Augment(AugmentArgs),
    /// Draw a weighted training mixture from labelled corpora.
    Mix(MixArgs),
    /// Corpus BLEU, optionally after resegmentation.
    Score(ScoreArgs),
    /// Word error rate, ignoring case and punctuation.
    Wer(WerArgs),
    /// Corrupt tokens and boundaries to simulate recognizer output.
    Simulate(SimulateArgs),
    /// Mean sentence BLEU per reference-length bucket.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write to a file instead of stdout.
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyName {
    /// Punctuation, case and symbols removed.
    Stripped,
    /// Text untouched.
    Punctuated,
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    pub input: PathBuf,
    /// Overrides the configured policy.
    #[arg(long, value_enum)]
    pub policy: Option<PolicyName>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
pub struct SegmentArgs {
    /// Document file, segmented with the configured strategy.
    #[arg(required = true)]
    pub input: Option<PathBuf>,
    #[command(subcommand)]
    pub strategy: Option<SegmentStrategy>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Subcommand)]
pub enum SegmentStrategy {
    /// Break after tokens ending in . ! or ? (abbreviations excepted).
    Punct {
        input: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Split timed transcripts (JSON lines) at long pauses, capping segment length.
    Pause {
        input: PathBuf,
        /// Minimum silence in seconds.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        max_tokens: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Greedy chunks of N tokens.
    Fixed {
        input: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Documents whose boundaries are transferred.
    pub source: PathBuf,
    /// Documents whose tokens receive the boundaries.
    pub target: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct VariantsArgs {
    pub gold: PathBuf,
    pub system: PathBuf,
    /// Directory for gold.txt, system.txt, recognition.txt and segmentation.txt.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// Bitext file (source<TAB>target, blank line between documents).
    pub input: PathBuf,
    #[arg(long)]
    pub p_max: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct MixArgs {
    /// Original pool of a corpus, as LABEL=PATH. Repeatable.
    #[arg(long = "corpus", value_name = "LABEL=PATH", required = true)]
    pub corpora: Vec<String>,
    /// Augmented pool of a corpus, as LABEL=PATH. Repeatable.
    #[arg(long = "augmented", value_name = "LABEL=PATH")]
    pub augmented: Vec<String>,
    /// Sampling weight, as LABEL=W. Repeatable; replaces the configured weights.
    #[arg(long = "weight", value_name = "LABEL=W")]
    pub weights: Vec<String>,
    #[arg(long)]
    pub augmented_fraction: Option<f64>,
    /// Number of examples to draw.
    #[arg(long)]
    pub total: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct BleuArgs {
    /// Lowercase both sides before counting n-grams.
    #[arg(long)]
    pub case_insensitive: bool,
    #[arg(long)]
    pub max_order: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    pub hypothesis: PathBuf,
    pub reference: PathBuf,
    /// Project reference boundaries onto the hypothesis before scoring.
    #[arg(long)]
    pub resegment: bool,
    #[command(flatten)]
    pub bleu: BleuArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct WerArgs {
    pub reference: PathBuf,
    pub hypothesis: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub substitution_rate: Option<f64>,
    #[arg(long)]
    pub deletion_rate: Option<f64>,
    #[arg(long)]
    pub insertion_rate: Option<f64>,
    #[arg(long)]
    pub merge_rate: Option<f64>,
    #[arg(long)]
    pub split_rate: Option<f64>,
    /// Whitespace-separated vocabulary for substitutions and insertions.
    /// Defaults to the configured vocabulary, then to the input's own tokens.
    #[arg(long, value_name = "PATH")]
    pub vocab: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub hypothesis: PathBuf,
    pub reference: PathBuf,
    /// Comma-separated LOWER:UPPER reference-length ranges, e.g. 0:20,20:40,40:60.
    #[arg(long)]
    pub bounds: Option<String>,
    #[command(flatten)]
    pub bleu: BleuArgs,
    #[command(flatten)]
    pub output: Output,
}
