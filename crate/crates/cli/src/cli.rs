use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tempqa_core::time::{default_snapshot, TimePoint};

#[derive(Debug, Parser)]
#[command(name = "tempqa", version, about = "Build, solve and score temporal QA datasets")]
pub struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true, env = "TEMPQA_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (defaults to the number of cores). Output does not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Stop at the first malformed input row instead of skipping it.
    #[arg(long, global = true)]
    pub strict: bool,

    /// Question template file (TOML). Defaults to the bundled table.
    #[arg(long, global = true)]
    pub templates: Option<PathBuf>,

    /// Date that closes ongoing facts, e.g. "Nov 2022".
    #[arg(long, global = true, default_value_t = default_snapshot())]
    pub snapshot: TimePoint,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time-time questions over a date range, split into train/dev/test.
    GenL1(GenL1Args),
    /// Time-time questions over Jan 2022 to Dec 2040.
    GenL1Future(GenL1FutureArgs),
    /// Time-event questions from a fact file.
    GenL2(FactArgs),
    /// Event-event questions from a fact file.
    GenL3(GenL3Args),
    /// Render questions as CBQA, OBQA or ReasonQA prompts.
    Render(RenderArgs),
    /// Mask entity and temporal spans in annotated documents.
    Mask(MaskArgs),
    /// Answer questions with the symbolic solver.
    Solve(SolveArgs),
    /// Score predictions against questions.
    Eval(EvalArgs),
    /// Per-prediction rewards for RL training.
    Reward(RewardArgs),
    /// Dataset counts for a fact file and optional question files.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormSet {
    /// Year-and-month, years-only and months-only offsets.
    Month,
    /// Adds the year-granularity forms ("What is the year after 1905?").
    All,
}

#[derive(Debug, Args)]
pub struct GenL1Args {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "Jan 1014")]
    pub start: String,
    #[arg(long, default_value = "Dec 2022")]
    pub end: String,
    /// Questions for train, dev and test.
    #[arg(long, value_delimiter = ',', default_values_t = [400_000usize, 4_000, 4_000])]
    pub counts: Vec<usize>,
    #[arg(long, value_enum, default_value_t = FormSet::Month)]
    pub forms: FormSet,
}

#[derive(Debug, Args)]
pub struct GenL1FutureArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 4_000)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = FormSet::Month)]
    pub forms: FormSet,
}

#[derive(Debug, Args)]
pub struct GroupArgs {
    /// Fact quintuplets, one JSON object per line.
    #[arg(long)]
    pub facts: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub min_facts: usize,
    /// Subjects kept per relation; 0 keeps all.
    #[arg(long, default_value_t = 2000)]
    pub max_subjects: usize,
    /// Subjects for train, dev and test.
    #[arg(long, value_delimiter = ',', conflicts_with = "split_ratios")]
    pub split_counts: Option<Vec<usize>>,
    /// Subject fractions for train, dev and test.
    #[arg(long, value_delimiter = ',', default_values_t = [0.6f64, 0.2, 0.2])]
    pub split_ratios: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct FactArgs {
    #[command(flatten)]
    pub groups: GroupArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenL3Args {
    #[command(flatten)]
    pub base: FactArgs,
    /// One question per adjacent pair (alternating before/after) instead of two.
    #[arg(long)]
    pub one_per_pair: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SettingArg {
    Cbqa,
    Obqa,
    Reasonqa,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub questions: PathBuf,
    #[arg(long, value_enum)]
    pub setting: SettingArg,
    /// Needed for ReasonQA.
    #[arg(long)]
    pub facts: Option<PathBuf>,
    /// JSONL of {"subject_id", "article"}; needed for OBQA.
    #[arg(long)]
    pub articles: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    /// JSONL of {"doc_id", "text", "spans": [{"start", "end", "kind"}]}.
    #[arg(long)]
    pub docs: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub ratio: f64,
    #[arg(long, default_value = "<mask_{k}>")]
    pub sentinel_pattern: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub questions: PathBuf,
    /// Needed for L2 and L3 questions.
    #[arg(long)]
    pub facts: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write each solution with its reasoning steps.
    #[arg(long)]
    pub rationale: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BreakdownArg {
    Period,
    Relation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MissingArg {
    Zero,
    Skip,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub questions: PathBuf,
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub breakdown: Vec<BreakdownArg>,
    #[arg(long, value_delimiter = ',', default_values_t = [1900, 1920, 1940, 1960, 1980, 2000, 2020, 2040])]
    pub period_edges: Vec<i32>,
    #[arg(long, value_enum, default_value_t = MissingArg::Zero)]
    pub missing: MissingArg,
    /// Absolute error charged for unparseable year answers (default: leave them out of MAE).
    #[arg(long)]
    pub unparseable_penalty: Option<u32>,
    /// Write the report as JSON here as well.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Score even when the inputs were produced under different render versions.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScorerArg {
    Em,
    F1,
}

#[derive(Debug, Args)]
pub struct RewardArgs {
    #[arg(long)]
    pub questions: PathBuf,
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long, value_enum, default_value_t = ScorerArg::Em)]
    pub scorer: ScorerArg,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub groups: GroupArgs,
    /// Question files to count by level and split.
    #[arg(long, num_args = 1..)]
    pub questions: Vec<PathBuf>,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}
