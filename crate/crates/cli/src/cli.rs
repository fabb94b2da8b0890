use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use forge_core::corpus::OnError;

#[derive(Debug, Parser)]
#[command(name = "forge", version, about = "Corpus curation stages and pipelines")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "FORGE_THREADS")]
    pub threads: Option<usize>,

    /// Seed for every randomized step.
    #[arg(long, global = true, env = "FORGE_SEED")]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Drop records with invalid fields, bad length or table/image-dominated text.
    Clean(CleanArgs),
    /// Keep records in the target languages.
    Langid(LangidArgs),
    /// Drop records whose URL matches a deny keyword.
    Urlfilter(UrlfilterArgs),
    /// Replace e-mails, URLs, phone, id and financial numbers with placeholders.
    Pii(StageIo),
    /// Line-structure quality filter.
    Quality(QualityArgs),
    /// Drop ratios for a grid of quality thresholds.
    QualityGrid(QualityGridArgs),
    /// Suffix-entropy and lemma-diversity filter.
    Morph(MorphArgs),
    /// Retention statistics over a grid of morphology thresholds.
    MorphSweep(MorphSweepArgs),
    /// Exact and semantic deduplication.
    Dedup(DedupArgs),
    /// Run one curriculum phase.
    Phase(PhaseArgs),
    /// Add MLM-masked token ids to every record.
    Mask(MaskArgs),
    /// Token-length statistics.
    Stats(StatsArgs),
    /// Production-efficiency ranking of embedding models.
    Efficiency(EfficiencyArgs),
    /// Contrastive-loss kernels over a similarity matrix.
    #[command(subcommand)]
    Score(ScoreCommand),
    /// Run a configured multi-stage pipeline.
    Pipeline(PipelineArgs),
    /// Re-hash the inputs recorded in a manifest.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct StageIo {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Dropped records and unreadable lines, one JSON object per line.
    #[arg(long)]
    pub rejects: Option<PathBuf>,
    #[arg(long, default_value = "skip", value_parser = parse_on_error)]
    pub on_error: OnError,
}

fn parse_on_error(s: &str) -> Result<OnError, String> {
    s.parse()
}

#[derive(Debug, Args)]
pub struct CleanArgs {
    #[command(flatten)]
    pub io: StageIo,
    #[arg(long, default_value_t = 64)]
    pub min_chars: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_chars: usize,
    #[arg(long, default_value_t = 0.5)]
    pub max_table_ratio: f64,
    #[arg(long, default_value_t = 0.5)]
    pub max_image_ratio: f64,
}

#[derive(Debug, Args)]
pub struct LangidArgs {
    #[command(flatten)]
    pub io: StageIo,
    /// Accepted language code; repeat for several.
    #[arg(long = "target", default_value = "tur")]
    pub targets: Vec<String>,
    #[arg(long, default_value_t = forge_core::filters::DEFAULT_MIN_LANG_CONFIDENCE)]
    pub min_confidence: f64,
    #[arg(long, default_value_t = 3)]
    pub top_k: usize,
    /// Accept when any of the top-k predictions is a target.
    #[arg(long)]
    pub any_of_top_k: bool,
}

#[derive(Debug, Args)]
pub struct UrlfilterArgs {
    #[command(flatten)]
    pub io: StageIo,
    #[arg(long = "deny")]
    pub deny_keywords: Vec<String>,
    #[arg(long = "allow")]
    pub allow_domains: Vec<String>,
    /// File with one deny keyword per line.
    #[arg(long)]
    pub denylist: Option<PathBuf>,
    /// File with one allowed domain per line.
    #[arg(long)]
    pub allowlist: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QualityArgs {
    #[command(flatten)]
    pub io: StageIo,
    #[arg(long, default_value_t = 0.67)]
    pub short_line: f64,
    #[arg(long, default_value_t = 0.03)]
    pub char_duplicates: f64,
    #[arg(long, default_value_t = 0.4)]
    pub new_line: f64,
    #[arg(long, default_value_t = 30)]
    pub short_line_length: usize,
}

#[derive(Debug, Args)]
pub struct QualityGridArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub report_dir: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.6,0.67,0.75")]
    pub short_line: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.03,0.05")]
    pub char_duplicates: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.4,0.5")]
    pub new_line: Vec<f64>,
    #[arg(long, default_value = "skip", value_parser = parse_on_error)]
    pub on_error: OnError,
}

#[derive(Debug, Args)]
pub struct MorphArgs {
    #[command(flatten)]
    pub io: StageIo,
    #[arg(long, default_value_t = 0.75)]
    pub tau_suffix: f64,
    #[arg(long, default_value_t = 0.50)]
    pub tau_lemma: f64,
    #[arg(long, default_value_t = 10)]
    pub min_tokens: usize,
}

#[derive(Debug, Args)]
pub struct MorphSweepArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub report_dir: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.7,0.75,0.8,0.85,0.9")]
    pub suffix_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.7,0.75,0.8,0.85,0.9")]
    pub lemma_grid: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub min_tokens: usize,
    #[arg(long, default_value_t = 32768)]
    pub vocab_size: usize,
    #[arg(long, default_value = "skip", value_parser = parse_on_error)]
    pub on_error: OnError,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Exact,
    Semantic,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProfileArg {
    General,
    Legal,
}

#[derive(Debug, Args)]
pub struct DedupArgs {
    #[command(flatten)]
    pub io: StageIo,
    #[arg(long, value_enum, default_value = "both")]
    pub mode: ModeArg,
    /// Overrides the profile's threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, value_enum, default_value = "general")]
    pub profile: ProfileArg,
    /// Per-record decisions: id, kept, duplicate_of, similarity.
    #[arg(long)]
    pub decisions: Option<PathBuf>,
    #[arg(long, default_value_t = 1024)]
    pub embed_dim: usize,
    #[arg(long, default_value_t = 5)]
    pub ngram: usize,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[arg(long)]
    pub phase: String,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub rejects: Option<PathBuf>,
    #[arg(long)]
    pub replay: Option<PathBuf>,
    #[arg(long)]
    pub replay_fraction: Option<f64>,
    /// TOML file with `[providers]` and per-stage `[[stages]]` overrides.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "skip", value_parser = parse_on_error)]
    pub on_error: OnError,
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub select_prob: Option<f64>,
    /// Use the 15% evaluation masking rate.
    #[arg(long, conflicts_with = "select_prob")]
    pub evaluation: bool,
    #[arg(long, default_value_t = 32768)]
    pub vocab_size: usize,
    #[arg(long, default_value = "skip", value_parser = parse_on_error)]
    pub on_error: OnError,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub report_dir: PathBuf,
    #[arg(long, default_value_t = 32768)]
    pub vocab_size: usize,
    #[arg(long, default_value = "skip", value_parser = parse_on_error)]
    pub on_error: OnError,
}

#[derive(Debug, Args)]
pub struct EfficiencyArgs {
    /// CSV with columns model, retrieval, legal, params_millions, avg_ingest_time_s, max_seq_len, emb_dim.
    #[arg(long)]
    pub models: PathBuf,
    /// JSON report destination.
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum ScoreCommand {
    /// Mean InfoNCE loss.
    Infonce {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = forge_core::scoring::DEFAULT_TAU)]
        tau: f64,
        /// Additive margin on the positive similarity (0 = standard loss).
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
    },
    /// Valid-negative mask from guide similarities, as 0/1 CSV.
    Gist {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
    },
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub rejects: Option<PathBuf>,
    #[arg(long)]
    pub report_dir: Option<PathBuf>,
    #[arg(long, value_parser = parse_on_error)]
    pub on_error: Option<OnError>,
    /// Validate and print the stage plan without reading data.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// A report.json, manifest file or report directory.
    pub manifest: PathBuf,
}
