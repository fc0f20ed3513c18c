use std::collections::HashSet;
use std::path::Path;

use super::CorpusError;

const BUNDLED: &str = include_str!("../../data/stopwords_en.txt");

/// Stopword set loaded from a pinned data file: UTF-8, one entry per line,
/// `#` comments allowed, trailing whitespace stripped.
#[derive(Debug, Clone)]
pub struct StopwordList {
    words: HashSet<String>,
}

impl StopwordList {
    /// The English list shipped with the crate (`data/stopwords_en.txt`).
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled stopword list must be non-empty")
    }

    /// Load a list from disk. Missing or effectively empty files are
    /// errors: silently matching nothing would skew every downstream count.
    pub fn from_path(path: &Path) -> Result<Self, CorpusError> {
        let content = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&content).ok_or_else(|| CorpusError::EmptyStopwordList {
            path: path.display().to_string(),
        })
    }

    fn parse(content: &str) -> Option<Self> {
        let words: HashSet<String> = content
            .lines()
            .map(str::trim_end)
            .filter(|line| !line.is_empty() && !line.starts_with('#'))
            .map(str::to_owned)
            .collect();
        (!words.is_empty()).then_some(Self { words })
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_list_has_common_words() {
        let list = StopwordList::bundled();
        for w in ["the", "me", "a", "of", "don't"] {
            assert!(list.contains(w), "expected {w:?} in bundled list");
        }
        assert!(!list.contains("whale"));
        // Tokens the frequency tables are expected to keep.
        for w in ["one", "like", "upon", "would", "ye"] {
            assert!(!list.contains(w), "{w:?} must not be a stopword");
        }
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let list = StopwordList::parse("# comment\nthe  \n\nof\n").unwrap();
        assert_eq!(list.len(), 2);
        assert!(list.contains("the"));
        assert!(list.contains("of"));
    }

    #[test]
    fn empty_content_rejected() {
        assert!(StopwordList::parse("# only a comment\n").is_none());
    }
}
