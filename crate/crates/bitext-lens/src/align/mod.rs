//! IBM Model 1 lexical translation trained by expectation maximization.
//!
//! The model: every target token is generated independently by first
//! picking a source position uniformly (including a NULL pseudo-source ε
//! when enabled) and then emitting the token from the source symbol's
//! lexical distribution τ(target | source). Training alternates expected
//! alignment counts (E) with row normalization (M). The likelihood is
//! concave, so any positive initialization reaches the same optimum.
//!
//! Pairs are always processed in ascending corpus order and every row
//! reduction runs in fixed index order, so training is bit-for-bit
//! deterministic for a given corpus, config, and seed.

mod model_io;

pub use model_io::{
    load_model, model_from_str, model_to_string, save_model, write_diagnostics_csv,
};

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{AlignedCorpus, SentencePair, Side};

/// Textual form of the NULL pseudo-source in query APIs and model files.
/// Training rejects corpora whose source vocabulary contains this surface
/// so the notation stays unambiguous.
pub const NULL_SYMBOL: &str = "ε";

const DEFAULT_MIN_PROB_FLOOR: f64 = 1e-12;
const CONVERGENCE_DELTA: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum AlignError {
    #[error("cannot train on an empty corpus")]
    EmptyCorpus,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("pair {pair_id}: no source in the table can generate target {target:?}")]
    ZeroPosterior { pair_id: u64, target: String },
    #[error("numerical fault: non-finite probability in row for source {symbol:?}")]
    NumericalFault { symbol: String },
    #[error("source vocabulary contains the reserved NULL symbol {NULL_SYMBOL:?}")]
    ReservedSymbol,
    #[error("invalid priors: {0}")]
    InvalidPriors(String),
    #[error("table inversion: all-zero denominator for target {0:?}")]
    ZeroInversionDenominator(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("model file line {line}: {message}")]
    ModelParse { line: usize, message: String },
}

/// Which corpus side conditions the table.
///
/// `EmojiToText` is the default reading: emoji symbols are the source, so
/// the table stores τ(text-token | emoji) and ε sits on the emoji side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    EmojiToText,
    TextToEmoji,
}

impl Direction {
    pub fn source_side(self) -> Side {
        match self {
            Direction::EmojiToText => Side::Emoji,
            Direction::TextToEmoji => Side::Text,
        }
    }

    pub fn target_side(self) -> Side {
        match self {
            Direction::EmojiToText => Side::Text,
            Direction::TextToEmoji => Side::Emoji,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Direction::EmojiToText => Direction::TextToEmoji,
            Direction::TextToEmoji => Direction::EmojiToText,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::EmojiToText => "e2t",
            Direction::TextToEmoji => "t2e",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "e2t" => Some(Direction::EmojiToText),
            "t2e" => Some(Direction::TextToEmoji),
            _ => None,
        }
    }
}

/// Table initialization. Uniform fills every supported entry with
/// 1/|target vocab|; Random draws positive values from a seeded stream,
/// filling real source rows in id order and the ε row last.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Initialization {
    Uniform,
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy)]
pub struct TrainingConfig {
    pub iterations: u32,
    pub direction: Direction,
    pub use_null: bool,
    pub init: Initialization,
    pub min_prob_floor: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            iterations: 100,
            direction: Direction::EmojiToText,
            use_null: true,
            init: Initialization::Uniform,
            min_prob_floor: DEFAULT_MIN_PROB_FLOOR,
        }
    }
}

impl TrainingConfig {
    fn validate(&self) -> Result<(), AlignError> {
        if self.iterations == 0 {
            return Err(AlignError::InvalidConfig("iterations must be ≥ 1".into()));
        }
        if !(self.min_prob_floor >= 0.0 && self.min_prob_floor.is_finite()) {
            return Err(AlignError::InvalidConfig(
                "min_prob_floor must be a finite value ≥ 0".into(),
            ));
        }
        Ok(())
    }
}

/// Per-iteration training trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingDiagnostics {
    /// Corpus log-likelihood under the table each E-step saw, so entry
    /// `i` is the likelihood of the table after `i` updates.
    pub per_iteration_log_likelihood: Vec<f64>,
    /// First iteration (1-based) whose likelihood gain over the previous
    /// one fell below 1e-6. Informational only; training never stops
    /// early.
    pub converged_at: Option<u32>,
    /// exp(−final log-likelihood / total target tokens), evaluated on the
    /// table after the last update.
    pub final_perplexity: f64,
}

/// One sparse row: supported target ids (ascending) with probabilities.
#[derive(Debug, Clone, PartialEq)]
struct Row {
    targets: Vec<u32>,
    probs: Vec<f64>,
}

impl Row {
    fn lookup(&self, target: u32) -> Option<usize> {
        self.targets.binary_search(&target).ok()
    }

    fn prob(&self, target: u32) -> f64 {
        self.lookup(target).map_or(0.0, |i| self.probs[i])
    }
}

/// Sparse conditional distribution τ(target | source) over the source
/// vocabulary plus an optional ε row.
///
/// Probabilities live only on the support observed at construction;
/// `prob` reads anything else as zero. Every row that carries mass sums
/// to 1 within 1e-9 and stores nothing below the probability floor the
/// table was built with.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationTable {
    direction: Direction,
    use_null: bool,
    sources: Vec<String>,
    targets: Vec<String>,
    source_index: HashMap<String, u32>,
    target_index: HashMap<String, u32>,
    rows: Vec<Row>,
    null_row: Option<Row>,
    min_prob_floor: f64,
    iterations_trained: u32,
    seed: Option<u64>,
}

impl TranslationTable {
    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn use_null(&self) -> bool {
        self.use_null
    }

    pub fn min_prob_floor(&self) -> f64 {
        self.min_prob_floor
    }

    pub fn iterations_trained(&self) -> u32 {
        self.iterations_trained
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// τ(target | source); `source` may be [`NULL_SYMBOL`]. Unsupported
    /// pairs read as 0.
    pub fn prob(&self, source: &str, target: &str) -> f64 {
        let Some(target_id) = self.target_index.get(target) else {
            return 0.0;
        };
        self.row_for(source).map_or(0.0, |row| row.prob(*target_id))
    }

    /// Real source surfaces in id order (ε not included).
    pub fn source_surfaces(&self) -> impl Iterator<Item = &str> {
        self.sources.iter().map(String::as_str)
    }

    /// Target surfaces in id order.
    pub fn target_surfaces(&self) -> impl Iterator<Item = &str> {
        self.targets.iter().map(String::as_str)
    }

    /// All entries of one source row as (target, prob), in target-id
    /// order. `source` may be [`NULL_SYMBOL`].
    pub fn row(&self, source: &str) -> Option<impl Iterator<Item = (&str, f64)>> {
        self.row_for(source).map(|row| {
            row.targets
                .iter()
                .map(|&t| self.targets[t as usize].as_str())
                .zip(row.probs.iter().copied())
        })
    }

    fn row_for(&self, source: &str) -> Option<&Row> {
        if source == NULL_SYMBOL {
            self.null_row.as_ref()
        } else {
            let id = self.source_index.get(source)?;
            Some(&self.rows[*id as usize])
        }
    }

    /// Build a table directly from (source, target, prob) entries; source
    /// may be [`NULL_SYMBOL`] when `use_null` is set. Rows are stored as
    /// given, without normalization.
    pub fn from_entries(
        direction: Direction,
        use_null: bool,
        entries: &[(&str, &str, f64)],
    ) -> Result<Self, AlignError> {
        let mut table = TranslationTable {
            direction,
            use_null,
            sources: Vec::new(),
            targets: Vec::new(),
            source_index: HashMap::new(),
            target_index: HashMap::new(),
            rows: Vec::new(),
            null_row: if use_null {
                Some(Row {
                    targets: Vec::new(),
                    probs: Vec::new(),
                })
            } else {
                None
            },
            min_prob_floor: 0.0,
            iterations_trained: 0,
            seed: None,
        };
        for &(source, target, prob) in entries {
            table.insert_entry(source, target, prob)?;
        }
        table.sort_rows();
        Ok(table)
    }

    pub(crate) fn insert_entry(
        &mut self,
        source: &str,
        target: &str,
        prob: f64,
    ) -> Result<(), AlignError> {
        let target_id = match self.target_index.get(target) {
            Some(&id) => id,
            None => {
                let id = self.targets.len() as u32;
                self.targets.push(target.to_owned());
                self.target_index.insert(target.to_owned(), id);
                id
            }
        };
        let row = if source == NULL_SYMBOL {
            self.null_row
                .as_mut()
                .ok_or(AlignError::ReservedSymbol)?
        } else {
            let id = match self.source_index.get(source) {
                Some(&id) => id,
                None => {
                    let id = self.sources.len() as u32;
                    self.sources.push(source.to_owned());
                    self.source_index.insert(source.to_owned(), id);
                    self.rows.push(Row {
                        targets: Vec::new(),
                        probs: Vec::new(),
                    });
                    id
                }
            };
            &mut self.rows[id as usize]
        };
        row.targets.push(target_id);
        row.probs.push(prob);
        Ok(())
    }

    pub(crate) fn sort_rows(&mut self) {
        let all = self.rows.iter_mut().chain(self.null_row.iter_mut());
        for row in all {
            let mut order: Vec<usize> = (0..row.targets.len()).collect();
            order.sort_by_key(|&i| row.targets[i]);
            row.targets = order.iter().map(|&i| row.targets[i]).collect();
            row.probs = order.iter().map(|&i| row.probs[i]).collect();
        }
    }

    /// Support and initial probabilities for a training run.
    fn init(corpus: &AlignedCorpus, config: &TrainingConfig) -> Result<Self, AlignError> {
        let source_vocab = corpus.vocab(config.direction.source_side());
        let target_vocab = corpus.vocab(config.direction.target_side());
        if source_vocab.iter().any(|(s, _)| s == NULL_SYMBOL) {
            return Err(AlignError::ReservedSymbol);
        }
        let sources: Vec<String> = source_vocab.iter().map(|(s, _)| s.to_owned()).collect();
        let targets: Vec<String> = target_vocab.iter().map(|(s, _)| s.to_owned()).collect();
        let source_index: HashMap<String, u32> = sources
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        let target_index: HashMap<String, u32> = targets
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();

        // Support: every (source, target) co-occurring in some pair.
        let mut incidences: Vec<(u32, u32)> = Vec::new();
        for pair in &corpus.pairs {
            for source in pair.tokens(config.direction.source_side()) {
                let s = source_index[source.as_str()];
                for target in pair.tokens(config.direction.target_side()) {
                    incidences.push((s, target_index[target.as_str()]));
                }
            }
        }
        incidences.sort_unstable();
        incidences.dedup();

        let mut rows = vec![
            Row {
                targets: Vec::new(),
                probs: Vec::new(),
            };
            sources.len()
        ];
        for (s, t) in incidences {
            rows[s as usize].targets.push(t);
        }
        // ε can generate any target token of any pair, so its support is
        // the whole target vocabulary.
        let null_row = config.use_null.then(|| Row {
            targets: (0..targets.len() as u32).collect(),
            probs: Vec::new(),
        });

        let mut table = TranslationTable {
            direction: config.direction,
            use_null: config.use_null,
            sources,
            targets,
            source_index,
            target_index,
            rows,
            null_row,
            min_prob_floor: config.min_prob_floor,
            iterations_trained: 0,
            seed: match config.init {
                Initialization::Random { seed } => Some(seed),
                Initialization::Uniform => None,
            },
        };

        match config.init {
            Initialization::Uniform => {
                let uniform = 1.0 / table.targets.len() as f64;
                for row in table.rows_mut() {
                    row.probs = vec![uniform; row.targets.len()];
                }
            }
            Initialization::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for row in table.rows_mut() {
                    row.probs = (0..row.targets.len())
                        .map(|_| rng.gen_range(0.1..1.0))
                        .collect();
                    normalize_row(&mut row.probs, config.min_prob_floor);
                }
            }
        }
        Ok(table)
    }

    fn rows_mut(&mut self) -> impl Iterator<Item = &mut Row> {
        self.rows.iter_mut().chain(self.null_row.iter_mut())
    }

    fn rows_with_names(&self) -> impl Iterator<Item = (&str, &Row)> {
        self.sources
            .iter()
            .map(String::as_str)
            .zip(self.rows.iter())
            .chain(self.null_row.iter().map(|row| (NULL_SYMBOL, row)))
    }

    fn check_finite(&self) -> Result<(), AlignError> {
        for (name, row) in self.rows_with_names() {
            if row.probs.iter().any(|p| !p.is_finite()) {
                return Err(AlignError::NumericalFault {
                    symbol: name.to_owned(),
                });
            }
        }
        Ok(())
    }
}

/// Expected alignment counts from one E-step, on the same support as the
/// table that produced them.
#[derive(Debug, Clone)]
pub struct ExpectedCounts {
    sources: Vec<String>,
    targets: Vec<String>,
    rows: Vec<Row>,
    null_row: Option<Row>,
}

impl ExpectedCounts {
    /// Expected count c(source, target); `source` may be [`NULL_SYMBOL`].
    pub fn count(&self, source: &str, target: &str) -> f64 {
        let Some(t) = self.targets.iter().position(|x| x == target) else {
            return 0.0;
        };
        let row = if source == NULL_SYMBOL {
            self.null_row.as_ref()
        } else {
            self.sources
                .iter()
                .position(|x| x == source)
                .map(|s| &self.rows[s])
        };
        row.map_or(0.0, |row| row.prob(t as u32))
    }
}

/// Corpus with both sides resolved to table ids. Tokens missing from the
/// table map to `None` and contribute nothing.
struct IndexedCorpus {
    pairs: Vec<IndexedPair>,
}

struct IndexedPair {
    sources: Vec<Option<u32>>,
    targets: Vec<(Option<u32>, usize)>,
}

impl IndexedCorpus {
    fn new(corpus: &AlignedCorpus, table: &TranslationTable) -> Self {
        let pairs = corpus
            .pairs
            .iter()
            .map(|pair| IndexedPair {
                sources: pair
                    .tokens(table.direction.source_side())
                    .iter()
                    .map(|s| table.source_index.get(s.as_str()).copied())
                    .collect(),
                targets: pair
                    .tokens(table.direction.target_side())
                    .iter()
                    .enumerate()
                    .map(|(i, t)| (table.target_index.get(t.as_str()).copied(), i))
                    .collect(),
            })
            .collect();
        Self { pairs }
    }
}

struct Kahan {
    sum: f64,
    compensation: f64,
}

impl Kahan {
    fn new() -> Self {
        Self {
            sum: 0.0,
            compensation: 0.0,
        }
    }

    fn add(&mut self, x: f64) {
        let y = x - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }
}

/// A target token no source position (nor ε) could generate; resolved to
/// surfaces by the public wrappers.
struct EStepFault {
    pair_index: usize,
    target_position: usize,
}

fn zero_posterior_error(
    corpus: &AlignedCorpus,
    target_side: Side,
    fault: EStepFault,
) -> AlignError {
    let pair = &corpus.pairs[fault.pair_index];
    AlignError::ZeroPosterior {
        pair_id: pair.id,
        target: pair.tokens(target_side)[fault.target_position].clone(),
    }
}

/// E-step: accumulate expected counts and the log-likelihood of the data
/// under `table`, processing pairs in ascending order.
fn e_step(
    indexed: &IndexedCorpus,
    table: &TranslationTable,
) -> Result<(ExpectedCounts, f64), EStepFault> {
    let mut counts = ExpectedCounts {
        sources: table.sources.clone(),
        targets: table.targets.clone(),
        rows: table
            .rows
            .iter()
            .map(|row| Row {
                targets: row.targets.clone(),
                probs: vec![0.0; row.targets.len()],
            })
            .collect(),
        null_row: table.null_row.as_ref().map(|row| Row {
            targets: row.targets.clone(),
            probs: vec![0.0; row.targets.len()],
        }),
    };
    let mut ll = Kahan::new();
    // (source id, entry index within the row, τ) for the current target
    let mut scratch: Vec<(Option<u32>, usize, f64)> = Vec::new();

    for (pair_index, pair) in indexed.pairs.iter().enumerate() {
        let positions = pair.sources.len() + usize::from(table.use_null);
        let mut pair_ll = 0.0;
        for &(target, target_position) in &pair.targets {
            scratch.clear();
            let mut denom = 0.0;
            if let Some(t) = target {
                for &source in &pair.sources {
                    if let Some(s) = source {
                        if let Some(entry) = table.rows[s as usize].lookup(t) {
                            let p = table.rows[s as usize].probs[entry];
                            scratch.push((Some(s), entry, p));
                            denom += p;
                        }
                    }
                }
                if let Some(null_row) = &table.null_row {
                    if let Some(entry) = null_row.lookup(t) {
                        let p = null_row.probs[entry];
                        scratch.push((None, entry, p));
                        denom += p;
                    }
                }
            }
            if denom <= 0.0 {
                return Err(EStepFault {
                    pair_index,
                    target_position,
                });
            }
            for &(source, entry, p) in &scratch {
                let weight = p / denom;
                match source {
                    Some(s) => counts.rows[s as usize].probs[entry] += weight,
                    None => {
                        counts.null_row.as_mut().expect("null row exists").probs[entry] += weight;
                    }
                }
            }
            pair_ll += denom.ln();
        }
        pair_ll -= pair.targets.len() as f64 * (positions as f64).ln();
        ll.add(pair_ll);
    }
    Ok((counts, ll.sum))
}

fn normalize_row(probs: &mut [f64], floor: f64) {
    let sum: f64 = probs.iter().sum();
    if sum <= 0.0 {
        return;
    }
    for p in probs.iter_mut() {
        *p /= sum;
        if *p < floor {
            *p = floor;
        }
    }
    // Flooring disturbs the sum; renormalize and re-floor once. The second
    // floor pass can push the row sum above 1 by at most ~n·floor·ulp,
    // far inside the 1e-9 row-sum tolerance.
    let sum: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= sum;
        if *p < floor {
            *p = floor;
        }
    }
}

fn m_step(table: &TranslationTable, counts: ExpectedCounts) -> Result<TranslationTable, AlignError> {
    let mut next = TranslationTable {
        direction: table.direction,
        use_null: table.use_null,
        sources: counts.sources,
        targets: counts.targets,
        source_index: table.source_index.clone(),
        target_index: table.target_index.clone(),
        rows: counts.rows,
        null_row: counts.null_row,
        min_prob_floor: table.min_prob_floor,
        iterations_trained: table.iterations_trained,
        seed: table.seed,
    };
    let floor = next.min_prob_floor;
    for row in next.rows_mut() {
        normalize_row(&mut row.probs, floor);
    }
    next.check_finite()?;
    Ok(next)
}

/// One EM step over `corpus`: expected counts under `table`, row
/// normalized with the table's probability floor.
///
/// The table's distributions are assumed normalized. The output is
/// independent of pair processing order.
pub fn em_step(
    corpus: &AlignedCorpus,
    table: &TranslationTable,
) -> Result<TranslationTable, AlignError> {
    let (counts, _) = expected_counts_and_ll(corpus, table)?;
    m_step(table, counts)
}

/// Expected alignment counts c(source, target) accumulated from per-target
/// posteriors τ(t|s) / Σ_{s' ∈ sentence ∪ ε} τ(t|s').
pub fn expected_counts(
    corpus: &AlignedCorpus,
    table: &TranslationTable,
) -> Result<ExpectedCounts, AlignError> {
    Ok(expected_counts_and_ll(corpus, table)?.0)
}

fn expected_counts_and_ll(
    corpus: &AlignedCorpus,
    table: &TranslationTable,
) -> Result<(ExpectedCounts, f64), AlignError> {
    let indexed = IndexedCorpus::new(corpus, table);
    e_step(&indexed, table)
        .map_err(|fault| zero_posterior_error(corpus, table.direction.target_side(), fault))
}

/// Corpus log-likelihood under `table`:
/// Σ over pairs of [ −m·ln(l+1 if ε else l) + Σ_targets ln Σ_sources τ ].
///
/// A target no source (nor ε) can generate makes the likelihood −∞, which
/// is returned as an explicit sentinel rather than propagating a NaN.
pub fn log_likelihood(corpus: &AlignedCorpus, table: &TranslationTable) -> f64 {
    let indexed = IndexedCorpus::new(corpus, table);
    log_likelihood_indexed(&indexed, table)
}

fn log_likelihood_indexed(indexed: &IndexedCorpus, table: &TranslationTable) -> f64 {
    let mut ll = Kahan::new();
    for pair in &indexed.pairs {
        let positions = pair.sources.len() + usize::from(table.use_null);
        let mut pair_ll = 0.0;
        for &(target, _) in &pair.targets {
            let mut denom = 0.0;
            if let Some(t) = target {
                for &source in &pair.sources {
                    if let Some(s) = source {
                        denom += table.rows[s as usize].prob(t);
                    }
                }
                if let Some(null_row) = &table.null_row {
                    denom += null_row.prob(t);
                }
            }
            if denom <= 0.0 {
                return f64::NEG_INFINITY;
            }
            pair_ll += denom.ln();
        }
        pair_ll -= pair.targets.len() as f64 * (positions as f64).ln();
        ll.add(pair_ll);
    }
    ll.sum
}

/// Train IBM Model 1 for `config.iterations` EM steps.
pub fn train(
    corpus: &AlignedCorpus,
    config: &TrainingConfig,
) -> Result<(TranslationTable, TrainingDiagnostics), AlignError> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(AlignError::EmptyCorpus);
    }
    let mut table = TranslationTable::init(corpus, config)?;
    let indexed = IndexedCorpus::new(corpus, &table);
    let mut log_likelihoods = Vec::with_capacity(config.iterations as usize);

    for _ in 0..config.iterations {
        let (counts, ll) = e_step(&indexed, &table)
            .map_err(|fault| zero_posterior_error(corpus, config.direction.target_side(), fault))?;
        table = m_step(&table, counts)?;
        log_likelihoods.push(ll);
    }
    table.iterations_trained = config.iterations;

    let final_ll = log_likelihood_indexed(&indexed, &table);
    let target_tokens: usize = indexed.pairs.iter().map(|p| p.targets.len()).sum();
    let converged_at = log_likelihoods
        .windows(2)
        .position(|w| (w[1] - w[0]).abs() < CONVERGENCE_DELTA)
        .map(|i| i as u32 + 2);
    let diagnostics = TrainingDiagnostics {
        per_iteration_log_likelihood: log_likelihoods,
        converged_at,
        final_perplexity: (-final_ll / target_tokens as f64).exp(),
    };
    Ok((table, diagnostics))
}

/// One source row of [`top_alignments`] output.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceAlignments {
    pub source: String,
    pub targets: Vec<(String, f64)>,
}

/// The `k` sources with the strongest individual alignments, each with
/// its `per_source` most probable targets.
///
/// Sources rank by max τ(t|source), descending, ties by ascending
/// codepoint order; ε is an eligible source row.
pub fn top_alignments(
    table: &TranslationTable,
    k: usize,
    per_source: usize,
) -> Vec<SourceAlignments> {
    let mut ranked: Vec<(&str, f64, &Row)> = table
        .rows_with_names()
        .filter_map(|(name, row)| {
            let best = row.probs.iter().copied().fold(0.0, f64::max);
            (best > 0.0).then_some((name, best, row))
        })
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(b.0)));
    ranked.truncate(k);

    ranked
        .into_iter()
        .map(|(name, _, row)| {
            let mut entries: Vec<(&str, f64)> = row
                .targets
                .iter()
                .zip(row.probs.iter())
                .map(|(&t, &p)| (table.targets[t as usize].as_str(), p))
                .collect();
            entries.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(b.0)));
            entries.truncate(per_source);
            SourceAlignments {
                source: name.to_owned(),
                targets: entries
                    .into_iter()
                    .map(|(t, p)| (t.to_owned(), p))
                    .collect(),
            }
        })
        .collect()
}

/// Where one target token aligned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkedSource {
    /// Index into the pair's source token sequence.
    Position(usize),
    Null,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentLink {
    pub target_index: usize,
    pub source: LinkedSource,
    /// Set when the target token was absent from the table entirely; such
    /// tokens fall back to ε.
    pub unknown_target: bool,
}

/// Most-probable alignment for one pair: exactly one link per target
/// token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentLinks {
    pub pair_id: u64,
    pub links: Vec<AlignmentLink>,
}

/// Per-token argmax alignment of `pair` under `table`.
///
/// Ties break toward the earliest source position; ε only wins strictly.
/// Target tokens missing from the table link to ε with `unknown_target`
/// set.
pub fn viterbi_align(pair: &SentencePair, table: &TranslationTable) -> AlignmentLinks {
    let sources = pair.tokens(table.direction.source_side());
    let targets = pair.tokens(table.direction.target_side());
    let links = targets
        .iter()
        .enumerate()
        .map(|(target_index, target)| {
            if !table.target_index.contains_key(target.as_str()) {
                return AlignmentLink {
                    target_index,
                    source: LinkedSource::Null,
                    unknown_target: true,
                };
            }
            let mut best_prob = -1.0;
            let mut best = LinkedSource::Position(0);
            for (i, source) in sources.iter().enumerate() {
                let p = table.prob(source, target);
                if p > best_prob {
                    best_prob = p;
                    best = LinkedSource::Position(i);
                }
            }
            if table.use_null && table.prob(NULL_SYMBOL, target) > best_prob {
                best = LinkedSource::Null;
            }
            AlignmentLink {
                target_index,
                source: best,
                unknown_target: false,
            }
        })
        .collect();
    AlignmentLinks {
        pair_id: pair.id,
        links,
    }
}

/// Empirical source-symbol priors for [`invert_table`]: relative
/// occurrence frequencies of source tokens in `corpus`, with ε weighted
/// by its expected usage Σ over target tokens of posterior(ε | token)
/// under `table`.
pub fn empirical_source_priors(
    corpus: &AlignedCorpus,
    table: &TranslationTable,
) -> Result<BTreeMap<String, f64>, AlignError> {
    let source_vocab = corpus.vocab(table.direction.source_side());
    let mut total = source_vocab.token_count() as f64;
    let mut priors: BTreeMap<String, f64> = source_vocab
        .iter()
        .map(|(s, c)| (s.to_owned(), c as f64))
        .collect();

    if table.use_null {
        let indexed = IndexedCorpus::new(corpus, table);
        let mut null_mass = Kahan::new();
        for pair in &indexed.pairs {
            for &(target, _) in &pair.targets {
                let Some(t) = target else { continue };
                let mut denom = 0.0;
                for &source in &pair.sources {
                    if let Some(s) = source {
                        denom += table.rows[s as usize].prob(t);
                    }
                }
                let null_prob = table.null_row.as_ref().map_or(0.0, |row| row.prob(t));
                denom += null_prob;
                if denom > 0.0 {
                    null_mass.add(null_prob / denom);
                }
            }
        }
        priors.insert(NULL_SYMBOL.to_owned(), null_mass.sum);
        total += null_mass.sum;
    }
    if total <= 0.0 {
        return Err(AlignError::InvalidPriors(
            "corpus has no source tokens".into(),
        ));
    }
    for value in priors.values_mut() {
        *value /= total;
    }
    Ok(priors)
}

/// Bayes inversion: from τ(target | source) and source priors to
/// p(source | target).
///
/// The output table conditions on the former targets, its target
/// vocabulary is the former sources plus "ε" (as an ordinary surface)
/// when the input had a NULL row, and each row is normalized. No
/// probability floor is applied.
pub fn invert_table(
    table: &TranslationTable,
    priors: &BTreeMap<String, f64>,
) -> Result<TranslationTable, AlignError> {
    let prior_sum: f64 = priors.values().sum();
    if (prior_sum - 1.0).abs() > 1e-9 {
        return Err(AlignError::InvalidPriors(format!(
            "priors sum to {prior_sum}, expected 1"
        )));
    }
    if let Some(bad) = priors.values().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(AlignError::InvalidPriors(format!(
            "negative or non-finite prior {bad}"
        )));
    }

    // weights[target] = (former source surface, τ·prior)
    let mut weights: Vec<Vec<(u32, f64)>> = vec![Vec::new(); table.targets.len()];
    let mut new_targets: Vec<String> = Vec::new();
    for (name, row) in table.rows_with_names() {
        if row.targets.is_empty() {
            continue;
        }
        let prior = *priors
            .get(name)
            .ok_or_else(|| AlignError::InvalidPriors(format!("missing prior for {name:?}")))?;
        let new_target_id = new_targets.len() as u32;
        new_targets.push(name.to_owned());
        for (&t, &p) in row.targets.iter().zip(row.probs.iter()) {
            weights[t as usize].push((new_target_id, p * prior));
        }
    }

    let mut inverted = TranslationTable {
        direction: table.direction.flipped(),
        use_null: false,
        sources: Vec::new(),
        targets: new_targets.clone(),
        source_index: HashMap::new(),
        target_index: new_targets
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect(),
        rows: Vec::new(),
        null_row: None,
        min_prob_floor: 0.0,
        iterations_trained: table.iterations_trained,
        seed: table.seed,
    };
    for (t, entries) in weights.into_iter().enumerate() {
        if entries.is_empty() {
            continue;
        }
        let denom: f64 = entries.iter().map(|(_, w)| w).sum();
        if denom <= 0.0 {
            return Err(AlignError::ZeroInversionDenominator(
                table.targets[t].clone(),
            ));
        }
        let surface = table.targets[t].clone();
        let id = inverted.sources.len() as u32;
        inverted.source_index.insert(surface.clone(), id);
        inverted.sources.push(surface);
        inverted.rows.push(Row {
            targets: entries.iter().map(|&(t, _)| t).collect(),
            probs: entries.iter().map(|&(_, w)| w / denom).collect(),
        });
    }
    inverted.sort_rows();
    inverted.check_finite()?;
    Ok(inverted)
}
