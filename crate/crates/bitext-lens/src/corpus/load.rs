//! Parallel-corpus file loading.
//!
//! Two line-oriented formats are supported:
//! - JSONL: one object per line with keys `id` (integer, optional),
//!   `text` (string), `emoji` (string);
//! - TSV: `id<TAB>text<TAB>emoji`, no header; tab and newline are
//!   forbidden inside fields.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::CorpusError;

/// One untokenized corpus record. Either string may be empty; filtering
/// happens after normalization, never at load.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPair {
    pub id: u64,
    pub text: String,
    pub emoji: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Tsv,
}

#[derive(Deserialize)]
struct JsonRecord {
    id: Option<u64>,
    text: String,
    emoji: String,
}

/// Read a corpus file into [`RawPair`]s, one per record, in file order.
///
/// Ids come from the record when present and are otherwise assigned
/// sequentially from 0. Duplicate ids and malformed records are errors
/// carrying the offending line number.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<RawPair>, CorpusError> {
    let content = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_corpus(&content, format)
}

/// [`load_corpus`] over an in-memory string. Blank lines are skipped.
pub fn parse_corpus(content: &str, format: CorpusFormat) -> Result<Vec<RawPair>, CorpusError> {
    let mut pairs = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in content.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let pair = match format {
            CorpusFormat::Jsonl => parse_jsonl_line(line, pairs.len() as u64),
            CorpusFormat::Tsv => parse_tsv_line(line),
        }
        .map_err(|message| CorpusError::Malformed {
            line: line_no,
            message,
        })?;
        if !seen.insert(pair.id) {
            return Err(CorpusError::DuplicateId {
                line: line_no,
                id: pair.id,
            });
        }
        pairs.push(pair);
    }
    Ok(pairs)
}

fn parse_jsonl_line(line: &str, next_id: u64) -> Result<RawPair, String> {
    let record: JsonRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    Ok(RawPair {
        id: record.id.unwrap_or(next_id),
        text: record.text,
        emoji: record.emoji,
    })
}

fn parse_tsv_line(line: &str) -> Result<RawPair, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    let [id, text, emoji] = fields.as_slice() else {
        return Err(format!("expected 3 tab-separated fields, got {}", fields.len()));
    };
    let id = id
        .parse::<u64>()
        .map_err(|_| format!("invalid id {id:?}"))?;
    Ok(RawPair {
        id,
        text: (*text).to_owned(),
        emoji: (*emoji).to_owned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_line_maps_fields() {
        let pairs =
            parse_corpus(r#"{"id":0,"text":"Call me Ishmael.","emoji":"☎️👨"}"#, CorpusFormat::Jsonl)
                .unwrap();
        assert_eq!(
            pairs,
            [RawPair {
                id: 0,
                text: "Call me Ishmael.".into(),
                emoji: "☎️👨".into(),
            }]
        );
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        assert!(parse_corpus("", CorpusFormat::Jsonl).unwrap().is_empty());
        assert!(parse_corpus("", CorpusFormat::Tsv).unwrap().is_empty());
    }

    #[test]
    fn missing_ids_assigned_sequentially() {
        let input = "{\"text\":\"a\",\"emoji\":\"🐳\"}\n{\"text\":\"b\",\"emoji\":\"🌊\"}\n";
        let pairs = parse_corpus(input, CorpusFormat::Jsonl).unwrap();
        assert_eq!(pairs[0].id, 0);
        assert_eq!(pairs[1].id, 1);
    }

    #[test]
    fn duplicate_id_rejected() {
        let input = "0\ta\t🐳\n0\tb\t🌊\n";
        let err = parse_corpus(input, CorpusFormat::Tsv).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId { line: 2, id: 0 }));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let input = "0\ta\t🐳\nnot a record\n";
        let err = parse_corpus(input, CorpusFormat::Tsv).unwrap_err();
        match err {
            CorpusError::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn tsv_fields_may_be_empty() {
        let pairs = parse_corpus("7\t\t\n", CorpusFormat::Tsv).unwrap();
        assert_eq!(pairs[0].id, 7);
        assert!(pairs[0].text.is_empty());
        assert!(pairs[0].emoji.is_empty());
    }
}
