//! Corpus ingestion, label vocabulary, deterministic splits, and the
//! frequency / length bucket partitions used by the evaluation reports.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::text::tokenize;

pub type LabelId = usize;

/// One legal text with its gold label set and token count under the
/// toolkit tokenizer.
#[derive(Debug, Clone)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub labels: BTreeSet<LabelId>,
    pub token_count: usize,
}

/// Canonical label strings with dense ids in first-seen order and
/// training-split frequencies.
#[derive(Debug, Clone, Default)]
pub struct LabelVocabulary {
    entries: Vec<String>,
    index: HashMap<String, LabelId>,
    train_counts: Vec<u64>,
}

impl LabelVocabulary {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn label(&self, id: LabelId) -> &str {
        &self.entries[id]
    }

    pub fn labels(&self) -> &[String] {
        &self.entries
    }

    pub fn id_of(&self, canonical: &str) -> Option<LabelId> {
        self.index.get(canonical).copied()
    }

    pub fn train_count(&self, id: LabelId) -> u64 {
        self.train_counts[id]
    }

    pub fn train_counts(&self) -> &[u64] {
        &self.train_counts
    }

    /// Insert a canonical label if new, returning its id either way.
    pub fn get_or_insert(&mut self, canonical: &str) -> LabelId {
        match self.index.get(canonical) {
            Some(&id) => id,
            None => {
                let id = self.entries.len();
                self.entries.push(canonical.to_string());
                self.index.insert(canonical.to_string(), id);
                self.train_counts.push(0);
                id
            }
        }
    }

    fn bump(&mut self, id: LabelId) {
        self.train_counts[id] += 1;
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub vocabulary: LabelVocabulary,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Gold label sets keyed by document id.
    pub fn gold_map(&self) -> BTreeMap<String, BTreeSet<LabelId>> {
        self.documents
            .iter()
            .map(|d| (d.id.clone(), d.labels.clone()))
            .collect()
    }
}

/// 20/60/20 partition of the labels that occur in training, by frequency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyBuckets {
    pub high: BTreeSet<LabelId>,
    pub medium: BTreeSet<LabelId>,
    pub low: BTreeSet<LabelId>,
}

/// Lowercase, trim Unicode whitespace, and collapse internal whitespace
/// runs to a single space. Idempotent.
pub fn canonicalize_label(raw: &str) -> Result<String> {
    let mut out = String::new();
    for word in raw.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&word.to_lowercase());
    }
    if out.is_empty() {
        return Err(Error::Data(format!("invalid label {raw:?}: empty after canonicalization")));
    }
    Ok(out)
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    text: String,
    labels: Vec<String>,
}

const KNOWN_FIELDS: [&str; 3] = ["id", "text", "labels"];

/// Read a JSONL corpus. Labels are canonicalized and assigned dense ids in
/// first-seen order; document order follows the file.
///
/// In lenient mode (the default) empty label arrays and unknown extra
/// fields produce warnings; strict mode rejects empty label arrays.
pub fn ingest_corpus(path: &Path, strict: bool) -> Result<Corpus> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    ingest_lines(reader.lines(), strict)
}

pub fn ingest_corpus_str(content: &str, strict: bool) -> Result<Corpus> {
    ingest_lines(content.lines().map(|l| Ok(l.to_string())), strict)
}

fn ingest_lines(
    lines: impl Iterator<Item = std::io::Result<String>>,
    strict: bool,
) -> Result<Corpus> {
    let mut documents = Vec::new();
    let mut vocabulary = LabelVocabulary::default();
    let mut seen_ids: HashSet<String> = HashSet::new();
    for (line_no, line) in lines.enumerate() {
        let line_no = line_no + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| Error::Data(format!("malformed JSON at line {line_no}: {e}")))?;
        if let Some(obj) = value.as_object() {
            for key in obj.keys() {
                if !KNOWN_FIELDS.contains(&key.as_str()) {
                    if strict {
                        return Err(Error::Data(format!(
                            "unknown field {key:?} at line {line_no}"
                        )));
                    }
                    log::warn!("line {line_no}: ignoring unknown field {key:?}");
                }
            }
        }
        let record: RawRecord = serde_json::from_value(value)
            .map_err(|e| Error::Data(format!("malformed record at line {line_no}: {e}")))?;
        if record.id.is_empty() {
            return Err(Error::Data(format!("empty document id at line {line_no}")));
        }
        if !seen_ids.insert(record.id.clone()) {
            return Err(Error::Data(format!("duplicate document id at line {line_no}")));
        }
        if record.labels.is_empty() {
            if strict {
                return Err(Error::Data(format!(
                    "document {:?} at line {line_no} has no labels",
                    record.id
                )));
            }
            log::warn!("line {line_no}: document {:?} has no labels", record.id);
        }
        let mut labels = BTreeSet::new();
        for raw_label in &record.labels {
            let canonical = canonicalize_label(raw_label)
                .map_err(|e| Error::Data(format!("line {line_no}: {e}")))?;
            labels.insert(vocabulary.get_or_insert(&canonical));
        }
        for &id in &labels {
            vocabulary.bump(id);
        }
        let token_count = tokenize(&record.text).len();
        documents.push(Document { id: record.id, text: record.text, labels, token_count });
    }
    Ok(Corpus { documents, vocabulary })
}

/// Partition labels with train count >= 1 into high / medium / low
/// frequency buckets. Sort order is (count descending, canonical string
/// ascending); the first ceil(0.2 L) labels are high and the last
/// ceil(0.2 L) are low, with high filled first when L is small.
pub fn frequency_buckets(vocab: &LabelVocabulary) -> Result<FrequencyBuckets> {
    let mut present: Vec<LabelId> =
        (0..vocab.len()).filter(|&id| vocab.train_count(id) >= 1).collect();
    if present.is_empty() {
        return Err(Error::Data("no labels with train count >= 1".into()));
    }
    present.sort_by(|&a, &b| {
        vocab
            .train_count(b)
            .cmp(&vocab.train_count(a))
            .then_with(|| vocab.label(a).cmp(vocab.label(b)))
    });
    let total = present.len();
    let n_high = (total as f64 * 0.2).ceil() as usize;
    let n_low = ((total as f64 * 0.2).ceil() as usize).min(total - n_high);
    let high: BTreeSet<LabelId> = present[..n_high].iter().copied().collect();
    let low: BTreeSet<LabelId> = present[total - n_low..].iter().copied().collect();
    let medium: BTreeSet<LabelId> =
        present[n_high..total - n_low].iter().copied().collect();
    Ok(FrequencyBuckets { high, medium, low })
}

pub const LENGTH_BUCKET_NAMES: [&str; 3] = ["short", "medium", "long"];

/// Partition documents by token count: short < b1, b1 <= medium <= b2,
/// long > b2.
pub fn length_buckets(
    corpus: &Corpus,
    boundaries: (usize, usize),
) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let (b1, b2) = boundaries;
    if b1 == 0 || b1 >= b2 {
        return Err(Error::Usage(format!(
            "length bucket boundaries must be positive and strictly increasing, got ({b1}, {b2})"
        )));
    }
    let mut out: BTreeMap<String, BTreeSet<String>> = LENGTH_BUCKET_NAMES
        .iter()
        .map(|name| (name.to_string(), BTreeSet::new()))
        .collect();
    for doc in &corpus.documents {
        let bucket = if doc.token_count < b1 {
            "short"
        } else if doc.token_count <= b2 {
            "medium"
        } else {
            "long"
        };
        out.get_mut(bucket).unwrap().insert(doc.id.clone());
    }
    Ok(out)
}

/// Deterministic seeded train/test split. The train vocabulary is rebuilt
/// from the train documents; the test corpus keeps the train vocabulary
/// and appends unseen labels with count 0.
pub fn split(corpus: &Corpus, train_fraction: f64, seed: u64) -> Result<(Corpus, Corpus)> {
    if corpus.is_empty() {
        return Err(Error::Usage("cannot split an empty corpus".into()));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Usage(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = corpus.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n_train = (train_fraction * n as f64).ceil() as usize;
    if n_train == 0 {
        return Err(Error::Usage("empty train split".into()));
    }
    if n_train >= n {
        return Err(Error::Usage("empty test split".into()));
    }
    let (train_idx, test_idx) = order.split_at(n_train);

    let mut train_vocab = LabelVocabulary::default();
    let mut train_docs = Vec::with_capacity(train_idx.len());
    for &i in train_idx {
        let doc = &corpus.documents[i];
        let labels: BTreeSet<LabelId> = doc
            .labels
            .iter()
            .map(|&l| train_vocab.get_or_insert(corpus.vocabulary.label(l)))
            .collect();
        for &id in &labels {
            train_vocab.bump(id);
        }
        train_docs.push(Document {
            id: doc.id.clone(),
            text: doc.text.clone(),
            labels,
            token_count: doc.token_count,
        });
    }

    let mut test_vocab = train_vocab.clone();
    let mut test_docs = Vec::with_capacity(test_idx.len());
    for &i in test_idx {
        let doc = &corpus.documents[i];
        let labels: BTreeSet<LabelId> = doc
            .labels
            .iter()
            .map(|&l| test_vocab.get_or_insert(corpus.vocabulary.label(l)))
            .collect();
        test_docs.push(Document {
            id: doc.id.clone(),
            text: doc.text.clone(),
            labels,
            token_count: doc.token_count,
        });
    }

    Ok((
        Corpus { documents: train_docs, vocabulary: train_vocab },
        Corpus { documents: test_docs, vocabulary: test_vocab },
    ))
}
