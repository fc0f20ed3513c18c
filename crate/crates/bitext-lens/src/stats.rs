//! Descriptive corpus statistics: token/type counts, mean sentence
//! lengths, rank-frequency tables, log-count points for Zipf plots, and
//! repeat-bigram analysis.
//!
//! Everything here is a pure read over an [`AlignedCorpus`]. All table
//! orderings are deterministic: counts sort descending with ties broken
//! by ascending codepoint order of the surface.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use num_rational::Ratio;
use thiserror::Error;

use crate::corpus::{AlignedCorpus, Side};
use crate::fmt::significant;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("cannot summarize an empty corpus")]
    EmptyCorpus,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv write failed: {0}")]
    Csv(#[from] csv::Error),
}

/// Token/type counts and mean sentence length for one side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSummary {
    pub side: Side,
    pub token_count: u64,
    pub type_count: u64,
    pub pair_count: u64,
    /// Tokens per sentence, kept rational so
    /// `mean_length * pair_count == token_count` holds exactly.
    pub mean_length: Ratio<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyEntry {
    pub surface: String,
    pub count: u64,
    pub rank: u64,
}

/// Ranked (surface, count) entries: counts non-increasing, ranks 1..n
/// with no gaps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrequencyTable {
    pub entries: Vec<FrequencyEntry>,
}

/// Adjacent-duplicate statistics for one side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepeatReport {
    pub side: Side,
    pub repeat_bigram_count: u64,
    pub total_bigram_count: u64,
    /// `repeat_bigram_count / total_bigram_count`, 0 when there are no
    /// bigrams at all.
    pub probability: Ratio<u64>,
    /// Surfaces that occurred adjacently at least once, ranked by
    /// adjacency count, ties by codepoint.
    pub top_repeats: Vec<(String, u64)>,
}

/// Count tokens, types, and pairs on the chosen side.
pub fn summarize(corpus: &AlignedCorpus, side: Side) -> Result<CorpusSummary, StatsError> {
    if corpus.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let vocab = corpus.vocab(side);
    let token_count = vocab.token_count();
    let pair_count = corpus.pairs.len() as u64;
    Ok(CorpusSummary {
        side,
        token_count,
        type_count: vocab.len() as u64,
        pair_count,
        mean_length: Ratio::new(token_count, pair_count),
    })
}

/// Rank every type on `side` by count, truncating to `limit` when given.
pub fn frequency_table(
    corpus: &AlignedCorpus,
    side: Side,
    limit: Option<usize>,
) -> FrequencyTable {
    let mut entries: Vec<(String, u64)> = corpus
        .vocab(side)
        .iter()
        .map(|(surface, count)| (surface.to_owned(), count))
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    if let Some(limit) = limit {
        entries.truncate(limit);
    }
    FrequencyTable {
        entries: entries
            .into_iter()
            .zip(1u64..)
            .map(|((surface, count), rank)| FrequencyEntry {
                surface,
                count,
                rank,
            })
            .collect(),
    }
}

/// Natural-log counts paired with ranks, in table order.
pub fn zipf_points(table: &FrequencyTable) -> Vec<(u64, f64)> {
    table
        .entries
        .iter()
        .map(|e| (e.rank, (e.count as f64).ln()))
        .collect()
}

/// Count adjacent identical surfaces within sentences on `side`.
///
/// Bigrams never cross pair boundaries: the total is
/// `Σ max(len − 1, 0)` over pairs.
pub fn repeat_bigrams(corpus: &AlignedCorpus, side: Side, top_k: usize) -> RepeatReport {
    let mut total: u64 = 0;
    let mut repeats: u64 = 0;
    let mut by_surface: HashMap<&str, u64> = HashMap::new();
    for pair in &corpus.pairs {
        let tokens = pair.tokens(side);
        total += tokens.len().saturating_sub(1) as u64;
        for window in tokens.windows(2) {
            if window[0] == window[1] {
                repeats += 1;
                *by_surface.entry(window[0].as_str()).or_insert(0) += 1;
            }
        }
    }
    let mut top_repeats: Vec<(String, u64)> = by_surface
        .into_iter()
        .map(|(s, c)| (s.to_owned(), c))
        .collect();
    top_repeats.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    top_repeats.truncate(top_k);
    let probability = if total == 0 {
        Ratio::new(0, 1)
    } else {
        Ratio::new(repeats, total)
    };
    RepeatReport {
        side,
        repeat_bigram_count: repeats,
        total_bigram_count: total,
        probability,
        top_repeats,
    }
}

fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, StatsError> {
    let file = std::fs::File::create(path).map_err(|source| StatsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

/// Write `summary.csv`: one row per supplied summary.
pub fn write_summary_csv(path: &Path, summaries: &[CorpusSummary]) -> Result<(), StatsError> {
    let mut w = csv_writer(path)?;
    w.write_record(["side", "token_count", "type_count", "pair_count", "mean_length"])?;
    for s in summaries {
        w.write_record([
            s.side.name().to_owned(),
            s.token_count.to_string(),
            s.type_count.to_string(),
            s.pair_count.to_string(),
            significant(ratio_to_f64(s.mean_length), 12),
        ])?;
    }
    w.flush().map_err(|source| StatsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(())
}

/// Write `freq_<side>.csv`: rank,surface,count.
pub fn write_frequency_csv(path: &Path, table: &FrequencyTable) -> Result<(), StatsError> {
    let mut w = csv_writer(path)?;
    w.write_record(["rank", "surface", "count"])?;
    for e in &table.entries {
        w.write_record([e.rank.to_string(), e.surface.clone(), e.count.to_string()])?;
    }
    w.flush().map_err(|source| StatsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(())
}

/// Write `zipf_<side>.csv`: rank,log_count (natural log, 12 significant
/// digits).
pub fn write_zipf_csv(path: &Path, points: &[(u64, f64)]) -> Result<(), StatsError> {
    let file = std::fs::File::create(path).map_err(|source| StatsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut file = std::io::BufWriter::new(file);
    // Comment row carries the log base; csv readers that reject comments
    // can skip the first line.
    writeln!(file, "# log base e").and_then(|_| file.flush()).map_err(|source| StatsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["rank", "log_count"])?;
    for (rank, log_count) in points {
        w.write_record([rank.to_string(), significant(*log_count, 12)])?;
    }
    w.flush().map_err(|source| StatsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(())
}

/// Write `repeats_<side>.csv`. The aggregate columns repeat on every row;
/// a report with no repeats still gets one row carrying the aggregates.
pub fn write_repeats_csv(path: &Path, report: &RepeatReport) -> Result<(), StatsError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "side",
        "repeat_bigram_count",
        "total_bigram_count",
        "probability",
        "rank",
        "surface",
        "count",
    ])?;
    let aggregate = [
        report.side.name().to_owned(),
        report.repeat_bigram_count.to_string(),
        report.total_bigram_count.to_string(),
        significant(ratio_to_f64(report.probability), 12),
    ];
    if report.top_repeats.is_empty() {
        let mut row = aggregate.to_vec();
        row.extend(["", "", ""].map(String::from));
        w.write_record(&row)?;
    }
    for (idx, (surface, count)) in report.top_repeats.iter().enumerate() {
        let mut row = aggregate.to_vec();
        row.extend([(idx + 1).to_string(), surface.clone(), count.to_string()]);
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| StatsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_corpus, NormalizationConfig, RawPair};

    fn corpus_of(lines: &[(&str, &str)]) -> AlignedCorpus {
        let raw: Vec<RawPair> = lines
            .iter()
            .enumerate()
            .map(|(i, (text, emoji))| RawPair {
                id: i as u64,
                text: (*text).to_owned(),
                emoji: (*emoji).to_owned(),
            })
            .collect();
        build_corpus(&raw, &NormalizationConfig::default())
    }

    #[test]
    fn summarize_counts_tokens_and_types() {
        let corpus = corpus_of(&[("ahab ben", "🐳")]);
        let summary = summarize(&corpus, Side::Text).unwrap();
        assert_eq!(summary.token_count, 2);
        assert_eq!(summary.type_count, 2);
        assert_eq!(summary.pair_count, 1);
        assert_eq!(summary.mean_length, Ratio::new(2, 1));
    }

    #[test]
    fn summarize_rejects_empty_corpus() {
        let corpus = AlignedCorpus::default();
        assert!(matches!(
            summarize(&corpus, Side::Text),
            Err(StatsError::EmptyCorpus)
        ));
    }

    #[test]
    fn frequency_table_sorts_and_breaks_ties_by_codepoint() {
        let corpus = corpus_of(&[("ahab ahab ben", "🐳")]);
        let table = frequency_table(&corpus, Side::Text, None);
        assert_eq!(
            table.entries,
            [
                FrequencyEntry {
                    surface: "ahab".into(),
                    count: 2,
                    rank: 1
                },
                FrequencyEntry {
                    surface: "ben".into(),
                    count: 1,
                    rank: 2
                },
            ]
        );
        let limited = frequency_table(&corpus, Side::Text, Some(1));
        assert_eq!(limited.entries, table.entries[..1]);
    }

    #[test]
    fn zipf_points_take_natural_logs() {
        let table = FrequencyTable {
            entries: vec![
                FrequencyEntry {
                    surface: "a".into(),
                    count: 8,
                    rank: 1,
                },
                FrequencyEntry {
                    surface: "b".into(),
                    count: 2,
                    rank: 2,
                },
            ],
        };
        let points = zipf_points(&table);
        assert_eq!(points[0], (1, 8f64.ln()));
        assert_eq!(points[1], (2, 2f64.ln()));

        let single = FrequencyTable {
            entries: vec![FrequencyEntry {
                surface: "a".into(),
                count: 1,
                rank: 1,
            }],
        };
        assert_eq!(zipf_points(&single), [(1, 0.0)]);
    }

    #[test]
    fn repeats_counted_within_sentences_only() {
        let corpus = corpus_of(&[("whale whale ben", "🐳")]);
        let report = repeat_bigrams(&corpus, Side::Text, 10);
        assert_eq!(report.total_bigram_count, 2);
        assert_eq!(report.repeat_bigram_count, 1);
        assert_eq!(report.probability, Ratio::new(1, 2));
        assert_eq!(report.top_repeats, [("whale".into(), 1)]);

        // Two one-token sentences: no bigrams at all.
        let corpus = corpus_of(&[("whale", "🐳"), ("whale", "🐳")]);
        let report = repeat_bigrams(&corpus, Side::Text, 10);
        assert_eq!(report.total_bigram_count, 0);
        assert_eq!(report.probability, Ratio::new(0, 1));
        assert!(report.top_repeats.is_empty());
    }
}
