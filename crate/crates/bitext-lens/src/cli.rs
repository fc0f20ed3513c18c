//! Command-line pipeline: deterministic subcommands over the library
//! operations, one CSV/TSV artifact set per command.
//!
//! Every command is deterministic given its inputs and flags; the only
//! run-dependent output is the timestamp inside `manifest.json`. Machine
//! output goes to files (or stdout for `top`); logs and warnings go to
//! stderr. Exit codes: 0 success, 1 internal invariant violation, 2
//! user/input error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::align::{
    empirical_source_priors, invert_table, load_model, save_model, top_alignments, train,
    write_diagnostics_csv, AlignError, Direction, Initialization, TrainingConfig,
};
use crate::corpus::{
    build_corpus, load_corpus, AlignedCorpus, CorpusError, CorpusFormat, Profile, Side,
    StopwordList,
};
use crate::pos::{
    corpus_pos_mass, induce_emoji_pos, load_pos_tags, write_emoji_pos_csv, write_pos_mass_csv,
    PosError, PosSource,
};
use crate::stats::{
    frequency_table, repeat_bigrams, summarize, write_frequency_csv, write_repeats_csv,
    write_summary_csv, write_zipf_csv, zipf_points, StatsError,
};

/// Environment variable consulted for a stopword file when `--stopwords`
/// is not given; the bundled list is the final fallback.
pub const STOPWORDS_ENV: &str = "BITEXT_LENS_STOPWORDS";

const EXIT_INTERNAL: i32 = 1;
const EXIT_USER: i32 = 2;

#[derive(Debug)]
enum CliError {
    /// Bad input or configuration; exit 2.
    User(String),
    /// Invariant violation inside the pipeline; exit 1.
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => EXIT_USER,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::User(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::EmptyCorpus => CliError::User("empty corpus".into()),
            other => CliError::User(other.to_string()),
        }
    }
}

impl From<AlignError> for CliError {
    fn from(e: AlignError) -> Self {
        match e {
            AlignError::NumericalFault { .. } | AlignError::ZeroPosterior { .. } => {
                CliError::Internal(e.to_string())
            }
            other => CliError::User(other.to_string()),
        }
    }
}

impl From<PosError> for CliError {
    fn from(e: PosError) -> Self {
        CliError::User(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "bitext-lens", version, about = "Analysis pipeline for text↔emoji parallel corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summary, frequency, and Zipf CSVs for both corpus sides
    Stats(StatsCmd),
    /// Train the lexical alignment model; export model TSV and diagnostics
    Train(TrainCmd),
    /// Print the strongest alignments from a trained model
    Top(TopCmd),
    /// Induce per-emoji POS distributions and corpus POS mass tables
    Pos(PosCmd),
    /// Repeat-bigram statistics for both corpus sides
    Repeats(RepeatsCmd),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Jsonl,
    Tsv,
}

impl FormatArg {
    fn to_format(self) -> CorpusFormat {
        match self {
            FormatArg::Jsonl => CorpusFormat::Jsonl,
            FormatArg::Tsv => CorpusFormat::Tsv,
        }
    }

    fn name(self) -> &'static str {
        match self {
            FormatArg::Jsonl => "jsonl",
            FormatArg::Tsv => "tsv",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfileArg {
    S2,
    S3,
}

impl ProfileArg {
    fn to_profile(self) -> Profile {
        match self {
            ProfileArg::S2 => Profile::S2,
            ProfileArg::S3 => Profile::S3,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    E2t,
    T2e,
}

impl DirectionArg {
    fn to_direction(self) -> Direction {
        match self {
            DirectionArg::E2t => Direction::EmojiToText,
            DirectionArg::T2e => Direction::TextToEmoji,
        }
    }
}

/// Corpus input flags shared by the corpus-reading commands.
#[derive(Args)]
struct CorpusInput {
    /// Corpus file (one record per line)
    corpus: PathBuf,
    /// Corpus file format
    #[arg(long, value_enum, default_value = "jsonl")]
    format: FormatArg,
    /// Stopword file; falls back to $BITEXT_LENS_STOPWORDS, then the
    /// bundled English list
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

#[derive(Args)]
struct StatsCmd {
    #[command(flatten)]
    input: CorpusInput,
    /// Normalization preset (s2 keeps emoji-side punctuation)
    #[arg(long, value_enum, default_value = "s2")]
    profile: ProfileArg,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainCmd {
    #[command(flatten)]
    input: CorpusInput,
    /// Normalization preset (s3 drops punctuation on both sides)
    #[arg(long, value_enum, default_value = "s3")]
    profile: ProfileArg,
    /// EM iterations
    #[arg(long, default_value_t = 100)]
    iterations: u32,
    /// Seed for random initialization; omit for uniform init
    #[arg(long)]
    seed: Option<u64>,
    /// Train without the ε NULL source symbol
    #[arg(long)]
    no_null: bool,
    /// Table direction: which side conditions the table
    #[arg(long, value_enum, default_value = "e2t")]
    direction: DirectionArg,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TopCmd {
    /// Trained model TSV
    model: PathBuf,
    /// Number of source rows to print
    #[arg(long, default_value_t = 20)]
    top_k: usize,
    /// Targets listed per source
    #[arg(long, default_value_t = 3)]
    per_source: usize,
}

#[derive(Args)]
struct PosCmd {
    /// Trained model TSV
    model: PathBuf,
    #[command(flatten)]
    input: CorpusInput,
    /// Tagged occurrences, token<TAB>tag per line
    #[arg(long)]
    pos: PathBuf,
    /// Normalization preset; must match the one the model was trained with
    #[arg(long, value_enum, default_value = "s3")]
    profile: ProfileArg,
    /// Expect a t2e model and Bayes-invert it before induction
    #[arg(long)]
    via_inversion: bool,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RepeatsCmd {
    #[command(flatten)]
    input: CorpusInput,
    /// Normalization preset
    #[arg(long, value_enum, default_value = "s2")]
    profile: ProfileArg,
    /// Repeated surfaces listed per side
    #[arg(long, default_value_t = 20)]
    top_k: usize,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

/// Parse `args` and run the selected command, returning the process exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits 2 for usage errors and 0 for --help/--version.
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Stats(cmd) => cmd_stats(&cmd),
        Command::Train(cmd) => cmd_train(&cmd),
        Command::Top(cmd) => cmd_top(&cmd),
        Command::Pos(cmd) => cmd_pos(&cmd),
        Command::Repeats(cmd) => cmd_repeats(&cmd),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("bitext-lens: error: {}", e.message());
            e.exit_code()
        }
    }
}

/// Stable digest of the fully resolved configuration: identical configs
/// hash identically.
fn config_hash(fields: &[(&str, String)]) -> String {
    let mut hasher = Sha256::new();
    for (key, value) in fields {
        hasher.update(key.as_bytes());
        hasher.update(b"=");
        hasher.update(value.as_bytes());
        hasher.update(b"\n");
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub input_paths: Vec<String>,
    pub output_paths: Vec<String>,
    pub timestamp: String,
    pub tool_version: String,
}

fn write_manifest(
    out_dir: &Path,
    command: &str,
    config: &[(&str, String)],
    input_paths: &[&Path],
    output_paths: &[PathBuf],
) -> Result<(), CliError> {
    let manifest = RunManifest {
        command: command.to_owned(),
        config_hash: config_hash(config),
        input_paths: input_paths
            .iter()
            .map(|p| p.display().to_string())
            .collect(),
        output_paths: output_paths
            .iter()
            .map(|p| p.display().to_string())
            .collect(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
    };
    let path = out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Internal(format!("manifest serialization failed: {e}")))?;
    std::fs::write(&path, json + "\n")
        .map_err(|e| CliError::User(format!("{}: {e}", path.display())))
}

struct ResolvedStopwords {
    list: StopwordList,
    /// How the list was chosen, for the config hash.
    origin: String,
}

fn resolve_stopwords(flag: &Option<PathBuf>) -> Result<ResolvedStopwords, CliError> {
    if let Some(path) = flag {
        return Ok(ResolvedStopwords {
            list: StopwordList::from_path(path)?,
            origin: path.display().to_string(),
        });
    }
    if let Some(path) = std::env::var_os(STOPWORDS_ENV) {
        let path = PathBuf::from(path);
        return Ok(ResolvedStopwords {
            list: StopwordList::from_path(&path)?,
            origin: path.display().to_string(),
        });
    }
    Ok(ResolvedStopwords {
        list: StopwordList::bundled(),
        origin: "bundled".to_owned(),
    })
}

fn load_aligned(input: &CorpusInput, profile: ProfileArg) -> Result<AlignedCorpus, CliError> {
    let stopwords = resolve_stopwords(&input.stopwords)?;
    let raw = load_corpus(&input.corpus, input.format.to_format())?;
    let config = profile.to_profile().config(stopwords.list);
    let corpus = build_corpus(&raw, &config);
    if corpus.is_empty() {
        return Err(CliError::User("empty corpus".into()));
    }
    Ok(corpus)
}

fn ensure_out_dir(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::User(format!("{}: {e}", out.display())))
}

fn base_config(input: &CorpusInput, profile: ProfileArg) -> Result<Vec<(&'static str, String)>, CliError> {
    let stopwords = resolve_stopwords(&input.stopwords)?;
    Ok(vec![
        ("corpus", input.corpus.display().to_string()),
        ("format", input.format.name().to_owned()),
        ("profile", profile.to_profile().name().to_owned()),
        ("stopwords", stopwords.origin),
    ])
}

fn cmd_stats(cmd: &StatsCmd) -> Result<(), CliError> {
    let corpus = load_aligned(&cmd.input, cmd.profile)?;
    ensure_out_dir(&cmd.out)?;

    let mut outputs = Vec::new();
    let summaries = [
        summarize(&corpus, Side::Text)?,
        summarize(&corpus, Side::Emoji)?,
    ];
    let summary_path = cmd.out.join("summary.csv");
    write_summary_csv(&summary_path, &summaries)?;
    outputs.push(summary_path);

    for side in [Side::Text, Side::Emoji] {
        let table = frequency_table(&corpus, side, None);
        let freq_path = cmd.out.join(format!("freq_{}.csv", side.name()));
        write_frequency_csv(&freq_path, &table)?;
        outputs.push(freq_path);

        let zipf_path = cmd.out.join(format!("zipf_{}.csv", side.name()));
        write_zipf_csv(&zipf_path, &zipf_points(&table))?;
        outputs.push(zipf_path);
    }

    let config = base_config(&cmd.input, cmd.profile)?;
    write_manifest(&cmd.out, "stats", &config, &[&cmd.input.corpus], &outputs)?;
    eprintln!(
        "stats: {} pairs ({} dropped), outputs in {}",
        corpus.pairs.len(),
        corpus.dropped_pair_count,
        cmd.out.display()
    );
    Ok(())
}

fn cmd_train(cmd: &TrainCmd) -> Result<(), CliError> {
    let corpus = load_aligned(&cmd.input, cmd.profile)?;
    let config = TrainingConfig {
        iterations: cmd.iterations,
        direction: cmd.direction.to_direction(),
        use_null: !cmd.no_null,
        init: match cmd.seed {
            Some(seed) => Initialization::Random { seed },
            None => Initialization::Uniform,
        },
        ..TrainingConfig::default()
    };
    let (table, diagnostics) = train(&corpus, &config)?;
    ensure_out_dir(&cmd.out)?;

    let model_path = cmd.out.join("model.tsv");
    save_model(&model_path, &table)?;
    let diagnostics_path = cmd.out.join("diagnostics.csv");
    write_diagnostics_csv(&diagnostics_path, &diagnostics)?;

    let mut manifest_config = base_config(&cmd.input, cmd.profile)?;
    manifest_config.extend([
        ("iterations", cmd.iterations.to_string()),
        (
            "seed",
            cmd.seed.map_or_else(|| "none".to_owned(), |s| s.to_string()),
        ),
        ("null", (!cmd.no_null).to_string()),
        ("direction", config.direction.as_str().to_owned()),
    ]);
    write_manifest(
        &cmd.out,
        "train",
        &manifest_config,
        &[&cmd.input.corpus],
        &[model_path, diagnostics_path],
    )?;
    eprintln!(
        "train: {} pairs, {} iterations, final log-likelihood {}",
        corpus.pairs.len(),
        cmd.iterations,
        diagnostics
            .per_iteration_log_likelihood
            .last()
            .copied()
            .unwrap_or(f64::NAN)
    );
    Ok(())
}

fn cmd_top(cmd: &TopCmd) -> Result<(), CliError> {
    let table = load_model(&cmd.model)?;
    let rows = top_alignments(&table, cmd.top_k, cmd.per_source);
    let mut stdout = String::new();
    for row in rows {
        stdout.push_str(&row.source);
        for (target, prob) in row.targets {
            stdout.push_str(&format!("\t{target} {prob:.4}"));
        }
        stdout.push('\n');
    }
    print!("{stdout}");
    Ok(())
}

fn cmd_pos(cmd: &PosCmd) -> Result<(), CliError> {
    let corpus = load_aligned(&cmd.input, cmd.profile)?;
    let model = load_model(&cmd.model)?;
    let table = if cmd.via_inversion {
        if model.direction() != Direction::TextToEmoji {
            return Err(CliError::User(format!(
                "--via-inversion expects a t2e model, found {}",
                model.direction().as_str()
            )));
        }
        let priors = empirical_source_priors(&corpus, &model)?;
        invert_table(&model, &priors)?
    } else {
        if model.direction() != Direction::EmojiToText {
            return Err(CliError::User(format!(
                "model direction is {}; pass --via-inversion for t2e models",
                model.direction().as_str()
            )));
        }
        model
    };
    let tags = load_pos_tags(&cmd.pos)?;
    let induced = induce_emoji_pos(&table, &tags)?;
    if !induced.omitted.is_empty() {
        eprintln!(
            "pos: warning: {} emoji omitted (no tagged token in their support): {}",
            induced.omitted.len(),
            induced.omitted.join(" ")
        );
    }
    ensure_out_dir(&cmd.out)?;

    let emoji_pos_path = cmd.out.join("emoji_pos.csv");
    write_emoji_pos_csv(&emoji_pos_path, &induced)?;
    let text_mass = corpus_pos_mass(&corpus, Side::Text, PosSource::Token(&tags))?;
    let text_mass_path = cmd.out.join("pos_mass_text.csv");
    write_pos_mass_csv(&text_mass_path, &text_mass)?;
    let emoji_mass = corpus_pos_mass(&corpus, Side::Emoji, PosSource::Emoji(&induced))?;
    let emoji_mass_path = cmd.out.join("pos_mass_emoji.csv");
    write_pos_mass_csv(&emoji_mass_path, &emoji_mass)?;

    let mut manifest_config = base_config(&cmd.input, cmd.profile)?;
    manifest_config.extend([
        ("model", cmd.model.display().to_string()),
        ("pos", cmd.pos.display().to_string()),
        ("via_inversion", cmd.via_inversion.to_string()),
    ]);
    write_manifest(
        &cmd.out,
        "pos",
        &manifest_config,
        &[&cmd.model, &cmd.input.corpus, &cmd.pos],
        &[emoji_pos_path, text_mass_path, emoji_mass_path],
    )?;
    Ok(())
}

fn cmd_repeats(cmd: &RepeatsCmd) -> Result<(), CliError> {
    let corpus = load_aligned(&cmd.input, cmd.profile)?;
    ensure_out_dir(&cmd.out)?;

    let mut outputs = Vec::new();
    for side in [Side::Text, Side::Emoji] {
        let report = repeat_bigrams(&corpus, side, cmd.top_k);
        let path = cmd.out.join(format!("repeats_{}.csv", side.name()));
        write_repeats_csv(&path, &report)?;
        outputs.push(path);
    }

    let mut manifest_config = base_config(&cmd.input, cmd.profile)?;
    manifest_config.push(("top_k", cmd.top_k.to_string()));
    write_manifest(&cmd.out, "repeats", &manifest_config, &[&cmd.input.corpus], &outputs)?;
    Ok(())
}

// Exercised end to end (exit codes, golden files, determinism) by the
// integration tests in tests/cli.rs.
#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_hash_is_stable_and_order_sensitive() {
        let a = config_hash(&[("k", "v".into()), ("x", "y".into())]);
        let b = config_hash(&[("k", "v".into()), ("x", "y".into())]);
        let c = config_hash(&[("x", "y".into()), ("k", "v".into())]);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn run_reports_usage_errors_as_exit_2() {
        assert_eq!(run(["bitext-lens", "no-such-command"]), 2);
    }
}
