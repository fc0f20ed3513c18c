//! Model persistence.
//!
//! Format: one `#ibm1 v1 …` header line, then `source<TAB>target<TAB>prob`
//! rows sorted by source codepoint order, descending probability within a
//! source, ascending target as the final tie-break. Probabilities print
//! as shortest round-trip decimals, so a loaded model reproduces the
//! original bit-exactly.

use std::path::Path;

use super::{AlignError, Direction, TranslationTable, NULL_SYMBOL};
use crate::align::TrainingDiagnostics;

/// Render `table` in the model TSV format.
pub fn model_to_string(table: &TranslationTable) -> String {
    let seed = table
        .seed
        .map_or_else(|| "none".to_owned(), |s| s.to_string());
    let mut out = format!(
        "#ibm1 v1 direction={} iterations={} null={} seed={}\n",
        table.direction.as_str(),
        table.iterations_trained,
        table.use_null,
        seed
    );

    let mut source_names: Vec<&str> = table.rows_with_names().map(|(name, _)| name).collect();
    source_names.sort_unstable();
    for name in source_names {
        let row = table.row_for(name).expect("row exists for listed source");
        let mut entries: Vec<(&str, f64)> = row
            .targets
            .iter()
            .zip(row.probs.iter())
            .map(|(&t, &p)| (table.targets[t as usize].as_str(), p))
            .collect();
        entries.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(b.0)));
        for (target, prob) in entries {
            out.push_str(name);
            out.push('\t');
            out.push_str(target);
            out.push('\t');
            out.push_str(&prob.to_string());
            out.push('\n');
        }
    }
    out
}

pub fn save_model(path: &Path, table: &TranslationTable) -> Result<(), AlignError> {
    std::fs::write(path, model_to_string(table)).map_err(|source| AlignError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<TranslationTable, AlignError> {
    let content = std::fs::read_to_string(path).map_err(|source| AlignError::Io {
        path: path.display().to_string(),
        source,
    })?;
    model_from_str(&content)
}

/// Parse a model file produced by [`model_to_string`].
pub fn model_from_str(content: &str) -> Result<TranslationTable, AlignError> {
    let mut lines = content.lines().enumerate();
    let (_, header) = lines.next().ok_or(AlignError::ModelParse {
        line: 1,
        message: "empty model file".into(),
    })?;
    let (direction, iterations, use_null, seed) = parse_header(header)?;

    let mut table = TranslationTable::from_entries(direction, use_null, &[])?;
    table.min_prob_floor = super::DEFAULT_MIN_PROB_FLOOR;
    table.iterations_trained = iterations;
    table.seed = seed;

    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(source), Some(target), Some(prob), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(AlignError::ModelParse {
                line: line_no,
                message: "expected source<TAB>target<TAB>prob".into(),
            });
        };
        let prob: f64 = prob.parse().map_err(|_| AlignError::ModelParse {
            line: line_no,
            message: format!("invalid probability {prob:?}"),
        })?;
        if !(0.0..=1.0).contains(&prob) {
            return Err(AlignError::ModelParse {
                line: line_no,
                message: format!("probability {prob} out of [0, 1]"),
            });
        }
        if source == NULL_SYMBOL && !use_null {
            return Err(AlignError::ModelParse {
                line: line_no,
                message: "ε row in a model declaring null=false".into(),
            });
        }
        table
            .insert_entry(source, target, prob)
            .map_err(|e| AlignError::ModelParse {
                line: line_no,
                message: e.to_string(),
            })?;
    }
    table.sort_rows();
    table.check_finite()?;
    Ok(table)
}

fn parse_header(
    header: &str,
) -> Result<(Direction, u32, bool, Option<u64>), AlignError> {
    let parse_err = |message: String| AlignError::ModelParse { line: 1, message };
    let mut parts = header.split(' ');
    if parts.next() != Some("#ibm1") || parts.next() != Some("v1") {
        return Err(parse_err(format!(
            "unrecognized header {header:?}, expected \"#ibm1 v1 …\""
        )));
    }
    let mut direction = None;
    let mut iterations = None;
    let mut use_null = None;
    let mut seed = None;
    for part in parts {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| parse_err(format!("malformed header field {part:?}")))?;
        match key {
            "direction" => {
                direction = Some(Direction::parse(value).ok_or_else(|| {
                    parse_err(format!("unknown direction {value:?}"))
                })?);
            }
            "iterations" => {
                iterations = Some(value.parse::<u32>().map_err(|_| {
                    parse_err(format!("invalid iterations {value:?}"))
                })?);
            }
            "null" => {
                use_null = Some(value.parse::<bool>().map_err(|_| {
                    parse_err(format!("invalid null flag {value:?}"))
                })?);
            }
            "seed" => {
                seed = if value == "none" {
                    Some(None)
                } else {
                    Some(Some(value.parse::<u64>().map_err(|_| {
                        parse_err(format!("invalid seed {value:?}"))
                    })?))
                };
            }
            other => return Err(parse_err(format!("unknown header field {other:?}"))),
        }
    }
    match (direction, iterations, use_null, seed) {
        (Some(d), Some(i), Some(n), Some(s)) => Ok((d, i, n, s)),
        _ => Err(parse_err("header missing required fields".into())),
    }
}

/// Write the training trace as CSV: `iteration,log_likelihood`.
pub fn write_diagnostics_csv(
    path: &Path,
    diagnostics: &TrainingDiagnostics,
) -> Result<(), AlignError> {
    let mut out = String::from("iteration,log_likelihood\n");
    for (i, ll) in diagnostics.per_iteration_log_likelihood.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, ll));
    }
    std::fs::write(path, out).map_err(|source| AlignError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::tests::corpus_from_tokens;
    use crate::align::{train, TrainingConfig};

    #[test]
    fn round_trip_is_bit_exact() {
        let corpus = corpus_from_tokens(&[
            (&["🐳", "🌊"], &["whale", "sea"]),
            (&["🐳"], &["whale"]),
        ]);
        let (table, _) = train(&corpus, &TrainingConfig::default()).unwrap();
        let serialized = model_to_string(&table);
        let loaded = model_from_str(&serialized).unwrap();
        assert_eq!(model_to_string(&loaded), serialized);
        for source in table.source_surfaces().chain([NULL_SYMBOL]) {
            for target in table.target_surfaces() {
                assert_eq!(
                    table.prob(source, target).to_bits(),
                    loaded.prob(source, target).to_bits(),
                    "prob({source}, {target}) changed across round trip"
                );
            }
        }
        assert_eq!(loaded.direction(), table.direction());
        assert_eq!(loaded.iterations_trained(), table.iterations_trained());
        assert_eq!(loaded.use_null(), table.use_null());
    }

    #[test]
    fn header_is_first_line() {
        let corpus = corpus_from_tokens(&[(&["x"], &["a"])]);
        let (table, _) = train(&corpus, &TrainingConfig::default()).unwrap();
        let serialized = model_to_string(&table);
        let header = serialized.lines().next().unwrap();
        assert_eq!(header, "#ibm1 v1 direction=e2t iterations=100 null=true seed=none");
    }

    #[test]
    fn rows_sorted_by_source_then_descending_prob() {
        let corpus = corpus_from_tokens(&[
            (&["🐳", "🌊"], &["whale", "sea"]),
            (&["🐳"], &["whale"]),
        ]);
        let (table, _) = train(&corpus, &TrainingConfig::default()).unwrap();
        let serialized = model_to_string(&table);
        let mut last_source: Option<&str> = None;
        let mut last_prob = f64::INFINITY;
        for line in serialized.lines().skip(1) {
            let mut fields = line.split('\t');
            let source = fields.next().unwrap();
            let prob: f64 = fields.nth(1).unwrap().parse().unwrap();
            if last_source == Some(source) {
                assert!(prob <= last_prob, "probs not descending within {source}");
            } else if let Some(prev) = last_source {
                assert!(source > prev, "sources not in codepoint order");
            }
            last_source = Some(source);
            last_prob = prob;
        }
    }

    #[test]
    fn malformed_input_reports_line() {
        let err = model_from_str("#ibm1 v1 direction=e2t iterations=1 null=false seed=none\nbroken line\n")
            .unwrap_err();
        match err {
            AlignError::ModelParse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }

        assert!(model_from_str("not a model\n").is_err());
    }

    #[test]
    fn null_row_requires_null_header() {
        let input = "#ibm1 v1 direction=e2t iterations=1 null=false seed=none\nε\ta\t1\n";
        assert!(model_from_str(input).is_err());
    }
}
