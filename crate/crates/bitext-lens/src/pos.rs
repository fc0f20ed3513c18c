//! Part-of-speech distributions: ingest token-level tag counts from an
//! externally tagged corpus, truncate tags to two-character prefixes, and
//! induce per-emoji POS distributions through the translation table.
//!
//! The tagger itself is out of scope; any `token<TAB>tag` file with one
//! tagged occurrence per line works. NNP, NNS, … all collapse to NN, tags
//! shorter than two characters (punctuation tags like ".") stay verbatim.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::align::{Direction, TranslationTable};
use crate::corpus::{AlignedCorpus, Side};
use crate::fmt::significant;

#[derive(Debug, Error)]
pub enum PosError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed tagged token: {message}")]
    Malformed { line: usize, message: String },
    #[error("tag file contains no tagged tokens")]
    EmptyTagFile,
    #[error("table direction is {found}, induction needs a table conditioned on emoji (e2t)")]
    WrongDirection { found: &'static str },
    #[error("no {side} occurrence has a POS distribution")]
    NoCoverage { side: &'static str },
    #[error("csv write failed: {0}")]
    Csv(#[from] csv::Error),
}

/// First two characters of a raw POS tag, or the whole tag when shorter.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PosPrefix(String);

impl PosPrefix {
    /// Truncate a raw tag. Returns `None` for an empty tag.
    pub fn from_tag(tag: &str) -> Option<Self> {
        if tag.is_empty() {
            return None;
        }
        Some(Self(tag.chars().take(2).collect()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PosPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Probability over POS prefixes; sums to 1 within 1e-9.
pub type PosDistribution = BTreeMap<PosPrefix, f64>;

/// Per-token POS distributions from occurrence counts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TokenPosTable {
    entries: BTreeMap<String, PosDistribution>,
}

impl TokenPosTable {
    pub fn get(&self, token: &str) -> Option<&PosDistribution> {
        self.entries.get(token)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &PosDistribution)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }
}

/// Load `token<TAB>raw_tag` lines, one tagged occurrence per line.
///
/// Token surfaces are lowercased before grouping; each token's
/// distribution is its occurrence counts normalized.
pub fn load_pos_tags(path: &Path) -> Result<TokenPosTable, PosError> {
    let content = std::fs::read_to_string(path).map_err(|source| PosError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_pos_tags(&content)
}

/// [`load_pos_tags`] over an in-memory string.
pub fn parse_pos_tags(content: &str) -> Result<TokenPosTable, PosError> {
    let mut counts: BTreeMap<String, BTreeMap<PosPrefix, u64>> = BTreeMap::new();
    for (idx, line) in content.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let Some((token, tag)) = line.split_once('\t') else {
            return Err(PosError::Malformed {
                line: line_no,
                message: "expected token<TAB>tag".into(),
            });
        };
        if token.is_empty() || tag.contains('\t') {
            return Err(PosError::Malformed {
                line: line_no,
                message: "expected exactly two tab-separated fields".into(),
            });
        }
        let prefix = PosPrefix::from_tag(tag).ok_or(PosError::Malformed {
            line: line_no,
            message: "empty tag".into(),
        })?;
        *counts
            .entry(token.to_lowercase())
            .or_default()
            .entry(prefix)
            .or_insert(0) += 1;
    }
    if counts.is_empty() {
        return Err(PosError::EmptyTagFile);
    }
    let entries = counts
        .into_iter()
        .map(|(token, tags)| {
            let total: u64 = tags.values().sum();
            let dist = tags
                .into_iter()
                .map(|(prefix, count)| (prefix, count as f64 / total as f64))
                .collect();
            (token, dist)
        })
        .collect();
    Ok(TokenPosTable { entries })
}

/// Per-emoji POS distributions induced through the translation table,
/// with each emoji's majority (argmax) prefix.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmojiPosTable {
    entries: BTreeMap<String, PosDistribution>,
    majority: BTreeMap<String, PosPrefix>,
    /// Emoji whose entire support lacked POS entries, in codepoint order.
    pub omitted: Vec<String>,
}

impl EmojiPosTable {
    pub fn get(&self, emoji: &str) -> Option<&PosDistribution> {
        self.entries.get(emoji)
    }

    pub fn majority(&self, emoji: &str) -> Option<&PosPrefix> {
        self.majority.get(emoji)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &PosDistribution)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }
}

/// Mix token POS distributions through τ(token | emoji):
/// p(pos | e) = Σ_t τ(t|e)·p(pos|t), renormalized over the tokens that
/// actually have POS entries.
///
/// Tokens without a POS entry contribute nothing and their alignment mass
/// is excluded by the renormalization. ε never appears in the output.
/// Emoji with no covered token at all are collected in
/// [`EmojiPosTable::omitted`].
pub fn induce_emoji_pos(
    table: &TranslationTable,
    pos: &TokenPosTable,
) -> Result<EmojiPosTable, PosError> {
    if table.direction() != Direction::EmojiToText {
        return Err(PosError::WrongDirection {
            found: table.direction().as_str(),
        });
    }
    let mut out = EmojiPosTable::default();
    for emoji in table.source_surfaces() {
        let row = table.row(emoji).expect("listed source has a row");
        let mut covered_mass = 0.0;
        let mut mixture: PosDistribution = BTreeMap::new();
        for (token, prob) in row {
            let Some(dist) = pos.get(token) else { continue };
            covered_mass += prob;
            for (prefix, p) in dist {
                *mixture.entry(prefix.clone()).or_insert(0.0) += prob * p;
            }
        }
        if covered_mass <= 0.0 {
            out.omitted.push(emoji.to_owned());
            continue;
        }
        for value in mixture.values_mut() {
            *value /= covered_mass;
        }
        let majority = argmax(&mixture).expect("non-empty mixture");
        out.majority.insert(emoji.to_owned(), majority);
        out.entries.insert(emoji.to_owned(), mixture);
    }
    out.omitted.sort();
    Ok(out)
}

/// Argmax prefix; ties resolve to the lexicographically smallest.
fn argmax(dist: &PosDistribution) -> Option<PosPrefix> {
    let mut best: Option<(&PosPrefix, f64)> = None;
    for (prefix, &p) in dist {
        match best {
            Some((_, bp)) if p <= bp => {}
            _ => best = Some((prefix, p)),
        }
    }
    best.map(|(prefix, _)| prefix.clone())
}

/// Emoji ranked by p(`prefix` | e) descending, ties by codepoint,
/// truncated to `k`. Emoji without mass on `prefix` are not listed; an
/// unknown prefix yields an empty list.
pub fn top_by_pos(table: &EmojiPosTable, prefix: &PosPrefix, k: usize) -> Vec<(String, f64)> {
    let mut ranked: Vec<(String, f64)> = table
        .entries
        .iter()
        .filter_map(|(emoji, dist)| {
            let p = dist.get(prefix).copied().unwrap_or(0.0);
            (p > 0.0).then(|| (emoji.clone(), p))
        })
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked
}

/// Where [`corpus_pos_mass`] reads its distributions from.
#[derive(Debug, Clone, Copy)]
pub enum PosSource<'a> {
    Token(&'a TokenPosTable),
    Emoji(&'a EmojiPosTable),
}

impl PosSource<'_> {
    fn get(&self, surface: &str) -> Option<&PosDistribution> {
        match self {
            PosSource::Token(table) => table.get(surface),
            PosSource::Emoji(table) => table.get(surface),
        }
    }
}

/// Corpus-level POS mass for one side: distributions of the actual token
/// occurrences averaged together.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusPosMass {
    pub side: Side,
    pub mass: BTreeMap<PosPrefix, f64>,
}

/// Average p(prefix | type) over every occurrence on `side` that has a
/// known distribution. Errors when nothing is covered.
pub fn corpus_pos_mass(
    corpus: &AlignedCorpus,
    side: Side,
    source: PosSource<'_>,
) -> Result<CorpusPosMass, PosError> {
    let mut mass: BTreeMap<PosPrefix, f64> = BTreeMap::new();
    let mut covered: u64 = 0;
    for pair in &corpus.pairs {
        for token in pair.tokens(side) {
            let Some(dist) = source.get(token) else { continue };
            covered += 1;
            for (prefix, &p) in dist {
                *mass.entry(prefix.clone()).or_insert(0.0) += p;
            }
        }
    }
    if covered == 0 {
        return Err(PosError::NoCoverage { side: side.name() });
    }
    for value in mass.values_mut() {
        *value /= covered as f64;
    }
    Ok(CorpusPosMass { side, mass })
}

/// Write `emoji_pos.csv`: emoji,prefix,prob,majority_flag.
pub fn write_emoji_pos_csv(path: &Path, table: &EmojiPosTable) -> Result<(), PosError> {
    let file = std::fs::File::create(path).map_err(|source| PosError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["emoji", "prefix", "prob", "majority_flag"])?;
    for (emoji, dist) in &table.entries {
        let majority = &table.majority[emoji];
        for (prefix, &p) in dist {
            w.write_record([
                emoji.as_str(),
                prefix.as_str(),
                &significant(p, 12),
                if prefix == majority { "true" } else { "false" },
            ])?;
        }
    }
    w.flush().map_err(|source| PosError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(())
}

/// Write `pos_mass_<side>.csv`: prefix,mass.
pub fn write_pos_mass_csv(path: &Path, mass: &CorpusPosMass) -> Result<(), PosError> {
    let file = std::fs::File::create(path).map_err(|source| PosError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["prefix", "mass"])?;
    for (prefix, &p) in &mass.mass {
        w.write_record([prefix.as_str(), &significant(p, 12)])?;
    }
    w.flush().map_err(|source| PosError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::TranslationTable;
    use crate::corpus::{AlignedCorpus, SentencePair};

    fn prefix(s: &str) -> PosPrefix {
        PosPrefix::from_tag(s).unwrap()
    }

    #[test]
    fn tag_truncation_follows_two_char_rule() {
        assert_eq!(prefix("NNS").as_str(), "NN");
        assert_eq!(prefix("NNP").as_str(), "NN");
        assert_eq!(prefix("VBD").as_str(), "VB");
        assert_eq!(prefix(".").as_str(), ".");
        assert!(PosPrefix::from_tag("").is_none());
    }

    #[test]
    fn parse_counts_and_normalizes() {
        let table = parse_pos_tags("whales\tNNS\nwhale\tNN\n").unwrap();
        assert_eq!(table.get("whales").unwrap()[&prefix("NN")], 1.0);
        assert_eq!(table.get("whale").unwrap()[&prefix("NN")], 1.0);

        let table = parse_pos_tags("run\tVB\nrun\tNN\nrun\tVBD\n").unwrap();
        let dist = table.get("run").unwrap();
        assert!((dist[&prefix("VB")] - 2.0 / 3.0).abs() < 1e-12);
        assert!((dist[&prefix("NN")] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn parse_lowercases_tokens() {
        let table = parse_pos_tags("Whale\tNN\nwhale\tNN\n").unwrap();
        assert_eq!(table.len(), 1);
        assert!(table.get("whale").is_some());
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(matches!(
            parse_pos_tags(""),
            Err(PosError::EmptyTagFile)
        ));
        let err = parse_pos_tags("whale\tNN\nno tag here\n").unwrap_err();
        assert!(matches!(err, PosError::Malformed { line: 2, .. }));
    }

    #[test]
    fn induce_single_support_chain() {
        let table =
            TranslationTable::from_entries(Direction::EmojiToText, false, &[("🏃", "run", 1.0)])
                .unwrap();
        let pos = parse_pos_tags("run\tVB\n").unwrap();
        let induced = induce_emoji_pos(&table, &pos).unwrap();
        assert_eq!(induced.get("🏃").unwrap()[&prefix("VB")], 1.0);
        assert_eq!(induced.majority("🏃").unwrap().as_str(), "VB");
    }

    #[test]
    fn induce_mixes_supports() {
        let table = TranslationTable::from_entries(
            Direction::EmojiToText,
            false,
            &[("🎭", "act", 0.5), ("🎭", "play", 0.5)],
        )
        .unwrap();
        let pos = parse_pos_tags("act\tNN\nplay\tVB\n").unwrap();
        let induced = induce_emoji_pos(&table, &pos).unwrap();
        let dist = induced.get("🎭").unwrap();
        assert!((dist[&prefix("NN")] - 0.5).abs() < 1e-12);
        assert!((dist[&prefix("VB")] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn induce_hand_arithmetic() {
        // τ(a|e)=0.6 with pos(a)={NN:0.5, VB:0.5}, τ(b|e)=0.4 with
        // pos(b)={NN:1} → 0.6·0.5 + 0.4·1 = 0.7 NN, 0.3 VB.
        let table = TranslationTable::from_entries(
            Direction::EmojiToText,
            false,
            &[("🎭", "a", 0.6), ("🎭", "b", 0.4)],
        )
        .unwrap();
        let pos = parse_pos_tags("a\tNN\na\tVB\nb\tNN\n").unwrap();
        let induced = induce_emoji_pos(&table, &pos).unwrap();
        let dist = induced.get("🎭").unwrap();
        assert!((dist[&prefix("NN")] - 0.7).abs() < 1e-12);
        assert!((dist[&prefix("VB")] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn induce_skips_uncovered_tokens_and_renormalizes() {
        let table = TranslationTable::from_entries(
            Direction::EmojiToText,
            false,
            &[("🎭", "known", 0.25), ("🎭", "unknown", 0.75)],
        )
        .unwrap();
        let pos = parse_pos_tags("known\tJJ\n").unwrap();
        let induced = induce_emoji_pos(&table, &pos).unwrap();
        assert_eq!(induced.get("🎭").unwrap()[&prefix("JJ")], 1.0);
    }

    #[test]
    fn induce_reports_fully_uncovered_emoji() {
        let table = TranslationTable::from_entries(
            Direction::EmojiToText,
            false,
            &[("🎭", "known", 1.0), ("👻", "unknown", 1.0)],
        )
        .unwrap();
        let pos = parse_pos_tags("known\tNN\n").unwrap();
        let induced = induce_emoji_pos(&table, &pos).unwrap();
        assert_eq!(induced.omitted, ["👻"]);
        assert!(induced.get("👻").is_none());
    }

    #[test]
    fn induce_requires_emoji_conditioned_table() {
        let table =
            TranslationTable::from_entries(Direction::TextToEmoji, false, &[("run", "🏃", 1.0)])
                .unwrap();
        let pos = parse_pos_tags("run\tVB\n").unwrap();
        assert!(matches!(
            induce_emoji_pos(&table, &pos),
            Err(PosError::WrongDirection { .. })
        ));
    }

    #[test]
    fn top_by_pos_ranks_and_filters() {
        let table = TranslationTable::from_entries(
            Direction::EmojiToText,
            false,
            &[("🎭", "act", 1.0), ("👀", "see", 1.0)],
        )
        .unwrap();
        let pos = parse_pos_tags("act\tVB\nact\tNN\nsee\tVB\n").unwrap();
        let induced = induce_emoji_pos(&table, &pos).unwrap();
        let top = top_by_pos(&induced, &prefix("VB"), 5);
        assert_eq!(top.len(), 2);
        assert_eq!(top[0].0, "👀");
        assert_eq!(top[0].1, 1.0);
        assert_eq!(top[1].0, "🎭");

        assert!(top_by_pos(&induced, &prefix("XX"), 5).is_empty());

        let single = TranslationTable::from_entries(
            Direction::EmojiToText,
            false,
            &[("🎭", "act", 1.0)],
        )
        .unwrap();
        let pos = parse_pos_tags("act\tNN\n").unwrap();
        let induced = induce_emoji_pos(&single, &pos).unwrap();
        assert_eq!(top_by_pos(&induced, &prefix("NN"), 5), [("🎭".to_owned(), 1.0)]);
        assert!(top_by_pos(&induced, &prefix("VB"), 5).is_empty());
    }

    fn corpus_one_side(side: Side, sentences: &[&[&str]]) -> AlignedCorpus {
        let mut corpus = AlignedCorpus::default();
        for (id, tokens) in sentences.iter().enumerate() {
            let tokens: Vec<String> = tokens.iter().map(|s| s.to_string()).collect();
            let mut pair = SentencePair {
                id: id as u64,
                raw_text: String::new(),
                raw_emoji: String::new(),
                text_tokens: vec!["_".into()],
                emoji_tokens: vec!["_".into()],
            };
            match side {
                Side::Text => pair.text_tokens = tokens,
                Side::Emoji => pair.emoji_tokens = tokens,
            }
            for t in pair.text_tokens.iter() {
                corpus.vocab_text.observe(t);
            }
            for t in pair.emoji_tokens.iter() {
                corpus.vocab_emoji.observe(t);
            }
            corpus.pairs.push(pair);
        }
        corpus
    }

    #[test]
    fn corpus_mass_weights_occurrences() {
        let corpus = corpus_one_side(Side::Text, &[&["run", "run"]]);
        let pos = parse_pos_tags("run\tVB\n").unwrap();
        let mass = corpus_pos_mass(&corpus, Side::Text, PosSource::Token(&pos)).unwrap();
        assert_eq!(mass.mass[&prefix("VB")], 1.0);

        let corpus = corpus_one_side(Side::Text, &[&["run", "whale"]]);
        let pos = parse_pos_tags("run\tVB\nwhale\tNN\n").unwrap();
        let mass = corpus_pos_mass(&corpus, Side::Text, PosSource::Token(&pos)).unwrap();
        assert!((mass.mass[&prefix("VB")] - 0.5).abs() < 1e-12);
        assert!((mass.mass[&prefix("NN")] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn corpus_mass_errors_without_coverage() {
        let corpus = corpus_one_side(Side::Text, &[&["mystery"]]);
        let pos = parse_pos_tags("other\tNN\n").unwrap();
        assert!(matches!(
            corpus_pos_mass(&corpus, Side::Text, PosSource::Token(&pos)),
            Err(PosError::NoCoverage { side: "text" })
        ));
    }
}
