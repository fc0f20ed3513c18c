//! Unicode tokenization: UAX #29 word segmentation for the text side and
//! extended grapheme clusters for the emoji side.
//!
//! Both tokenizers are defined entirely by the public standard so the
//! pipeline is reproducible without any particular NLP toolkit. Whitespace
//! segments are dropped; everything else becomes a token.

use unicode_properties::{GeneralCategory, UnicodeEmoji, UnicodeGeneralCategory};
use unicode_segmentation::UnicodeSegmentation;

/// Token classification shared by both sides of the corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Word,
    Emoji,
    Punctuation,
    Digit,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub surface: String,
    pub kind: TokenKind,
}

impl Token {
    pub fn new(surface: impl Into<String>, kind: TokenKind) -> Self {
        Self {
            surface: surface.into(),
            kind,
        }
    }
}

/// Split `s` at UAX #29 word boundaries and classify each segment.
///
/// Segments are maximal runs between word boundaries; whitespace-only
/// segments are never emitted. Classification: all scalars decimal digits
/// (Nd) → digit, any alphanumeric scalar → word, otherwise punctuation.
pub fn tokenize_text(s: &str) -> Vec<Token> {
    s.split_word_bounds()
        .filter(|seg| !is_whitespace_only(seg))
        .map(|seg| Token::new(seg, classify(seg)))
        .collect()
}

/// Split `s` into extended grapheme clusters (UAX #29), dropping
/// whitespace clusters.
///
/// A cluster whose first scalar carries the Unicode `Emoji` property is an
/// emoji token, so ZWJ sequences, variation selectors, and skin-tone
/// modifiers stay inside a single token. Remaining clusters are classified
/// like text.
pub fn tokenize_emoji(s: &str) -> Vec<Token> {
    s.graphemes(true)
        .filter(|cluster| !is_whitespace_only(cluster))
        .map(|cluster| {
            let emoji = cluster
                .chars()
                .next()
                .is_some_and(UnicodeEmoji::is_emoji_char);
            let kind = if emoji {
                TokenKind::Emoji
            } else {
                classify(cluster)
            };
            Token::new(cluster, kind)
        })
        .collect()
}

fn is_whitespace_only(s: &str) -> bool {
    s.chars().all(char::is_whitespace)
}

fn classify(seg: &str) -> TokenKind {
    if seg.chars().all(is_decimal_digit) {
        TokenKind::Digit
    } else if seg.chars().any(char::is_alphanumeric) {
        TokenKind::Word
    } else {
        TokenKind::Punctuation
    }
}

fn is_decimal_digit(c: char) -> bool {
    c.general_category() == GeneralCategory::DecimalNumber
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    #[test]
    fn splits_at_word_boundaries() {
        let tokens = tokenize_text("Call me Ishmael.");
        assert_eq!(surfaces(&tokens), ["Call", "me", "Ishmael", "."]);
        assert_eq!(
            tokens.iter().map(|t| t.kind).collect::<Vec<_>>(),
            [
                TokenKind::Word,
                TokenKind::Word,
                TokenKind::Word,
                TokenKind::Punctuation
            ]
        );
    }

    #[test]
    fn all_digit_run_is_digit() {
        let tokens = tokenize_text("1851");
        assert_eq!(tokens, [Token::new("1851", TokenKind::Digit)]);
    }

    #[test]
    fn empty_input_yields_no_tokens() {
        assert!(tokenize_text("").is_empty());
        assert!(tokenize_emoji("").is_empty());
    }

    #[test]
    fn apostrophe_stays_in_word() {
        // UAX #29 WB6/WB7: ALetter × Single_Quote × ALetter does not break.
        assert_eq!(surfaces(&tokenize_text("whale's")), ["whale's"]);
    }

    #[test]
    fn zwj_family_is_one_cluster() {
        let tokens = tokenize_emoji("👨\u{200d}👩\u{200d}👧");
        assert_eq!(tokens.len(), 1);
        assert_eq!(tokens[0].kind, TokenKind::Emoji);
    }

    #[test]
    fn adjacent_emoji_split() {
        let tokens = tokenize_emoji("🐳🐳");
        assert_eq!(tokens.len(), 2);
        assert!(tokens.iter().all(|t| t.kind == TokenKind::Emoji));
    }

    #[test]
    fn variation_selector_stays_in_cluster() {
        let tokens = tokenize_emoji("☁\u{fe0f}!");
        assert_eq!(
            tokens,
            [
                Token::new("☁\u{fe0f}", TokenKind::Emoji),
                Token::new("!", TokenKind::Punctuation),
            ]
        );
    }

    #[test]
    fn emoji_side_whitespace_dropped() {
        let tokens = tokenize_emoji("🐳 🌊\t!");
        assert_eq!(surfaces(&tokens), ["🐳", "🌊", "!"]);
    }

    #[test]
    fn non_emoji_clusters_classified_like_text() {
        let tokens = tokenize_emoji("ok 7 .");
        assert_eq!(
            tokens,
            [
                Token::new("o", TokenKind::Word),
                Token::new("k", TokenKind::Word),
                // '7' carries the Emoji property (keycap component)
                Token::new("7", TokenKind::Emoji),
                Token::new(".", TokenKind::Punctuation),
            ]
        );
    }
}
