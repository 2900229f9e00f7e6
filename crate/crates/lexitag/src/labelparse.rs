//! Parse free-form LLM generations back into canonical label sets, with
//! explicit accounting of unknown labels and duplicate mentions.

use std::collections::{BTreeSet, HashSet};
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{canonicalize_label, LabelId, LabelVocabulary};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub separators: Vec<char>,
    pub strict: bool,
    /// Dropped once if the generation starts with one of them,
    /// case-insensitively.
    pub strip_prefixes: Vec<String>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            separators: vec![',', ';', '\n'],
            strict: false,
            strip_prefixes: vec!["labels:".to_string(), "categories:".to_string()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedPrediction {
    pub doc_id: String,
    pub labels: BTreeSet<LabelId>,
    pub unknown: Vec<String>,
    pub duplicates: usize,
}

/// Parse a single generation. Non-strict mode is total: unresolved
/// fragments are recorded, never fatal. Strict mode fails on the first
/// unknown fragment.
pub fn parse_generation(
    raw: &str,
    vocab: &LabelVocabulary,
    opts: &ParseOptions,
) -> Result<ParsedPrediction> {
    if opts.separators.is_empty() {
        return Err(Error::Config("parse options need at least one separator".into()));
    }
    let trimmed = raw.trim_start();
    let mut body = trimmed;
    for prefix in &opts.strip_prefixes {
        if let (Some(head), Some(tail)) =
            (trimmed.get(..prefix.len()), trimmed.get(prefix.len()..))
        {
            if head.eq_ignore_ascii_case(prefix) {
                body = tail;
                break;
            }
        }
    }
    let mut labels = BTreeSet::new();
    let mut unknown = Vec::new();
    let mut duplicates = 0;
    for fragment in body.split(|c: char| opts.separators.contains(&c)) {
        let Ok(canonical) = canonicalize_label(fragment) else {
            continue; // empty fragment
        };
        match vocab.id_of(&canonical) {
            Some(id) => {
                if !labels.insert(id) {
                    duplicates += 1;
                }
            }
            None => {
                if opts.strict {
                    return Err(Error::Parse(format!(
                        "unknown label {canonical:?} in generation"
                    )));
                }
                unknown.push(canonical);
            }
        }
    }
    Ok(ParsedPrediction { doc_id: String::new(), labels, unknown, duplicates })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ParseSummary {
    pub docs_parsed: usize,
    pub total_unknown: usize,
    pub total_duplicates: usize,
}

#[derive(Deserialize)]
struct GenerationRecord {
    id: String,
    generation: String,
}

/// Parse a JSONL file of {"id", "generation"} records, preserving input
/// order.
pub fn parse_generation_file(
    path: &Path,
    vocab: &LabelVocabulary,
    opts: &ParseOptions,
) -> Result<(Vec<ParsedPrediction>, ParseSummary)> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut predictions = Vec::new();
    let mut summary = ParseSummary::default();
    let mut seen_ids: HashSet<String> = HashSet::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line_no = line_no + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: GenerationRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Data(format!("malformed generation at line {line_no}: {e}")))?;
        if !seen_ids.insert(record.id.clone()) {
            return Err(Error::Data(format!("duplicate document id at line {line_no}")));
        }
        let mut parsed = parse_generation(&record.generation, vocab, opts)
            .map_err(|e| match e {
                Error::Parse(msg) => Error::Parse(format!("line {line_no}: {msg}")),
                other => other,
            })?;
        parsed.doc_id = record.id;
        summary.docs_parsed += 1;
        summary.total_unknown += parsed.unknown.len();
        summary.total_duplicates += parsed.duplicates;
        predictions.push(parsed);
    }
    Ok((predictions, summary))
}
