//! Corpus construction: loading, tokenization, normalization, and pair
//! filtering.
//!
//! [`build_corpus`] runs the whole front half of the pipeline: tokenize
//! both sides of every pair, normalize per a [`NormalizationConfig`], drop
//! pairs that end up empty on either side, and build per-side
//! vocabularies.

mod load;
mod stopwords;
mod tokenize;
mod vocab;

pub use load::{load_corpus, parse_corpus, CorpusFormat, RawPair};
pub use stopwords::StopwordList;
pub use tokenize::{tokenize_emoji, tokenize_text, Token, TokenKind};
pub use vocab::Vocabulary;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate pair id {id}")]
    DuplicateId { line: usize, id: u64 },
    #[error("stopword list {path} is empty")]
    EmptyStopwordList { path: String },
}

/// Which half of the parallel corpus an operation applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Text,
    Emoji,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Text => "text",
            Side::Emoji => "emoji",
        }
    }
}

/// Token-level normalization switches.
///
/// Defaults: lowercase, drop digits, drop stopwords, drop text-side
/// punctuation, keep emoji-side punctuation.
#[derive(Debug, Clone)]
pub struct NormalizationConfig {
    pub lowercase: bool,
    pub drop_digits: bool,
    pub drop_stopwords: bool,
    pub drop_punctuation_text: bool,
    pub drop_punctuation_emoji: bool,
    pub stopwords: StopwordList,
}

impl NormalizationConfig {
    pub fn with_stopwords(stopwords: StopwordList) -> Self {
        Self {
            lowercase: true,
            drop_digits: true,
            drop_stopwords: true,
            drop_punctuation_text: true,
            drop_punctuation_emoji: false,
            stopwords,
        }
    }
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self::with_stopwords(StopwordList::bundled())
    }
}

/// Preset normalization regimes, selectable as `--profile` on the CLI.
///
/// `S2` keeps punctuation in the emoji stream, so frequency tables can
/// rank "!" and "?" alongside emoji. `S3` drops punctuation on both
/// sides, which is what alignment training expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    S2,
    S3,
}

impl Profile {
    pub fn config(self, stopwords: StopwordList) -> NormalizationConfig {
        let mut config = NormalizationConfig::with_stopwords(stopwords);
        if self == Profile::S3 {
            config.drop_punctuation_emoji = true;
        }
        config
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::S2 => "s2",
            Profile::S3 => "s3",
        }
    }
}

/// Apply lowercasing and the configured drop rules to one token sequence,
/// preserving the order of survivors.
///
/// Stopword matching always compares the lowercased surface, whether or
/// not lowercasing itself is enabled, and only ever applies to word
/// tokens: emoji are never stopword-matched.
pub fn normalize(tokens: &[Token], config: &NormalizationConfig, side: Side) -> Vec<Token> {
    let drop_punctuation = match side {
        Side::Text => config.drop_punctuation_text,
        Side::Emoji => config.drop_punctuation_emoji,
    };
    let mut out = Vec::with_capacity(tokens.len());
    for token in tokens {
        match token.kind {
            TokenKind::Digit if config.drop_digits => {}
            TokenKind::Punctuation if drop_punctuation => {}
            TokenKind::Word => {
                let lowered = token.surface.to_lowercase();
                if config.drop_stopwords && config.stopwords.contains(&lowered) {
                    continue;
                }
                let surface = if config.lowercase {
                    lowered
                } else {
                    token.surface.clone()
                };
                out.push(Token::new(surface, TokenKind::Word));
            }
            _ => out.push(token.clone()),
        }
    }
    out
}

/// One surviving corpus line with its normalized token sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub id: u64,
    pub raw_text: String,
    pub raw_emoji: String,
    pub text_tokens: Vec<String>,
    pub emoji_tokens: Vec<String>,
}

impl SentencePair {
    pub fn tokens(&self, side: Side) -> &[String] {
        match side {
            Side::Text => &self.text_tokens,
            Side::Emoji => &self.emoji_tokens,
        }
    }
}

/// Tokenized, normalized, filtered parallel corpus.
///
/// Every pair has non-empty token sequences on both sides; pairs that
/// normalized to empty on either side are counted in
/// `dropped_pair_count`. Vocabulary counts equal the summed token
/// occurrences across the surviving pairs.
#[derive(Debug, Clone, Default)]
pub struct AlignedCorpus {
    pub pairs: Vec<SentencePair>,
    pub vocab_text: Vocabulary,
    pub vocab_emoji: Vocabulary,
    pub dropped_pair_count: usize,
}

impl AlignedCorpus {
    pub fn vocab(&self, side: Side) -> &Vocabulary {
        match side {
            Side::Text => &self.vocab_text,
            Side::Emoji => &self.vocab_emoji,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Tokenize and normalize both sides of every pair, in input order.
pub fn build_corpus(pairs: &[RawPair], config: &NormalizationConfig) -> AlignedCorpus {
    let mut corpus = AlignedCorpus::default();
    for raw in pairs {
        let text_tokens = surfaces(normalize(&tokenize_text(&raw.text), config, Side::Text));
        let emoji_tokens = surfaces(normalize(&tokenize_emoji(&raw.emoji), config, Side::Emoji));
        if text_tokens.is_empty() || emoji_tokens.is_empty() {
            corpus.dropped_pair_count += 1;
            continue;
        }
        for surface in &text_tokens {
            corpus.vocab_text.observe(surface);
        }
        for surface in &emoji_tokens {
            corpus.vocab_emoji.observe(surface);
        }
        corpus.pairs.push(SentencePair {
            id: raw.id,
            raw_text: raw.text.clone(),
            raw_emoji: raw.emoji.clone(),
            text_tokens,
            emoji_tokens,
        });
    }
    corpus
}

fn surfaces(tokens: Vec<Token>) -> Vec<String> {
    tokens.into_iter().map(|t| t.surface).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(surfaces: &[&str]) -> Vec<Token> {
        surfaces
            .iter()
            .map(|s| Token::new(*s, TokenKind::Word))
            .collect()
    }

    #[test]
    fn normalize_lowercases_and_drops_stopwords() {
        let config = NormalizationConfig::default();
        let tokens = vec![
            Token::new("Call", TokenKind::Word),
            Token::new("me", TokenKind::Word),
            Token::new("Ishmael", TokenKind::Word),
            Token::new(".", TokenKind::Punctuation),
        ];
        let out = normalize(&tokens, &config, Side::Text);
        assert_eq!(out, words(&["call", "ishmael"]));
    }

    #[test]
    fn normalize_drops_digits() {
        let config = NormalizationConfig::default();
        let tokens = vec![Token::new("1851", TokenKind::Digit)];
        assert!(normalize(&tokens, &config, Side::Text).is_empty());
    }

    #[test]
    fn emoji_tokens_pass_through() {
        let config = NormalizationConfig::default();
        let tokens = vec![Token::new("🐳", TokenKind::Emoji)];
        assert_eq!(normalize(&tokens, &config, Side::Emoji), tokens);
    }

    #[test]
    fn punctuation_flags_are_side_specific() {
        let config = Profile::S2.config(StopwordList::bundled());
        let bang = vec![Token::new("!", TokenKind::Punctuation)];
        assert!(normalize(&bang, &config, Side::Text).is_empty());
        assert_eq!(normalize(&bang, &config, Side::Emoji), bang);

        let s3 = Profile::S3.config(StopwordList::bundled());
        assert!(normalize(&bang, &s3, Side::Emoji).is_empty());
    }

    #[test]
    fn stopword_match_uses_lowercased_surface_even_without_lowercasing() {
        let mut config = NormalizationConfig::default();
        config.lowercase = false;
        let tokens = words(&["The", "Whale"]);
        assert_eq!(normalize(&tokens, &config, Side::Text), words(&["Whale"]));
    }

    #[test]
    fn build_corpus_drops_and_counts_empty_pairs() {
        let raw = vec![
            RawPair {
                id: 0,
                text: "The whale.".into(),
                emoji: "🐳".into(),
            },
            RawPair {
                id: 1,
                text: "Of the!".into(),
                emoji: "🎨".into(),
            },
            RawPair {
                id: 2,
                text: "The whale again.".into(),
                emoji: String::new(),
            },
        ];
        let corpus = build_corpus(&raw, &NormalizationConfig::default());
        assert_eq!(corpus.pairs.len(), 1);
        assert_eq!(corpus.dropped_pair_count, 2);
        assert_eq!(corpus.pairs[0].text_tokens, ["whale"]);
        assert_eq!(corpus.vocab_text.count("whale"), 1);
        assert_eq!(corpus.vocab_emoji.count("🐳"), 1);
    }

    #[test]
    fn shared_tokens_are_counted() {
        let raw = vec![
            RawPair {
                id: 0,
                text: "whale ho".into(),
                emoji: "🐳".into(),
            },
            RawPair {
                id: 1,
                text: "whale below".into(),
                emoji: "🐳🌊".into(),
            },
        ];
        let corpus = build_corpus(&raw, &NormalizationConfig::default());
        assert_eq!(corpus.vocab_text.count("whale"), 2);
        assert_eq!(corpus.vocab_emoji.count("🐳"), 2);
    }
}
