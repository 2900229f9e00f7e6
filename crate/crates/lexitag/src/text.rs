//! Tokenization, TF-IDF vectorization, cosine similarity, and a BM25
//! inverted index. Shared substrate for the classical baselines.

use std::collections::HashMap;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type TermId = usize;

/// Lowercase the input and split it into maximal runs of alphanumeric
/// characters. Everything else is a separator.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            for lc in ch.to_lowercase() {
                current.push(lc);
            }
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Sparse vector with strictly increasing indices and no stored zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pub indices: Vec<TermId>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn empty() -> Self {
        SparseVector { indices: Vec::new(), values: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Scale so the L2 norm becomes 1.0. A zero vector is left untouched.
    pub fn normalize(&mut self) {
        let norm = self.l2_norm();
        if norm > 0.0 {
            for v in &mut self.values {
                *v /= norm;
            }
        }
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let mut sum = 0.0;
        let (mut i, mut j) = (0, 0);
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }
}

/// Cosine similarity over stored values. Either vector empty yields 0.0.
pub fn cosine_similarity(a: &SparseVector, b: &SparseVector) -> f64 {
    let na = a.l2_norm();
    let nb = b.l2_norm();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.dot(b) / (na * nb)
}

/// Fitted TF-IDF vectorizer. Term ids are dense in first-seen order.
///
/// idf[t] = ln((n_docs + 1) / (doc_freq[t] + 1)) + 1, always positive.
#[derive(Debug, Clone)]
pub struct TfidfModel {
    term_index: HashMap<String, TermId>,
    terms: Vec<String>,
    doc_freq: Vec<u32>,
    n_docs: usize,
    idf: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TfidfModelFile {
    version: u32,
    n_docs: usize,
    terms: Vec<TfidfTermEntry>,
}

#[derive(Serialize, Deserialize)]
struct TfidfTermEntry {
    term: String,
    df: u32,
}

impl TfidfModel {
    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term_id(&self, term: &str) -> Option<TermId> {
        self.term_index.get(term).copied()
    }

    pub fn doc_freq(&self, id: TermId) -> u32 {
        self.doc_freq[id]
    }

    pub fn idf(&self, id: TermId) -> f64 {
        self.idf[id]
    }

    pub fn to_json(&self) -> String {
        let file = TfidfModelFile {
            version: 1,
            n_docs: self.n_docs,
            terms: self
                .terms
                .iter()
                .zip(&self.doc_freq)
                .map(|(term, &df)| TfidfTermEntry { term: term.clone(), df })
                .collect(),
        };
        serde_json::to_string(&file).expect("tfidf model serialization")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        w.write_all(self.to_json().as_bytes())?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: TfidfModelFile =
            serde_json::from_str(json).map_err(|e| Error::Data(format!("bad tfidf model: {e}")))?;
        if file.version != 1 {
            return Err(Error::Data(format!("unsupported tfidf model version {}", file.version)));
        }
        let mut term_index = HashMap::new();
        let mut terms = Vec::new();
        let mut doc_freq = Vec::new();
        for entry in file.terms {
            if term_index.insert(entry.term.clone(), terms.len()).is_some() {
                return Err(Error::Data(format!("duplicate term in tfidf model: {}", entry.term)));
            }
            terms.push(entry.term);
            doc_freq.push(entry.df);
        }
        let idf = compute_idf(&doc_freq, file.n_docs);
        Ok(TfidfModel { term_index, terms, doc_freq, n_docs: file.n_docs, idf })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn compute_idf(doc_freq: &[u32], n_docs: usize) -> Vec<f64> {
    doc_freq
        .iter()
        .map(|&df| ((n_docs as f64 + 1.0) / (df as f64 + 1.0)).ln() + 1.0)
        .collect()
}

/// Fit a TF-IDF model over tokenized documents.
pub fn fit_tfidf(docs: &[Vec<String>]) -> Result<TfidfModel> {
    if docs.is_empty() {
        return Err(Error::Usage("fit_tfidf requires at least one document".into()));
    }
    let mut term_index: HashMap<String, TermId> = HashMap::new();
    let mut terms: Vec<String> = Vec::new();
    let mut doc_freq: Vec<u32> = Vec::new();
    let mut seen_in_doc: Vec<usize> = Vec::new(); // last doc index that counted this term
    for (doc_idx, tokens) in docs.iter().enumerate() {
        for token in tokens {
            let id = match term_index.get(token) {
                Some(&id) => id,
                None => {
                    let id = terms.len();
                    term_index.insert(token.clone(), id);
                    terms.push(token.clone());
                    doc_freq.push(0);
                    seen_in_doc.push(usize::MAX);
                    id
                }
            };
            if seen_in_doc[id] != doc_idx {
                seen_in_doc[id] = doc_idx;
                doc_freq[id] += 1;
            }
        }
    }
    let idf = compute_idf(&doc_freq, docs.len());
    Ok(TfidfModel { term_index, terms, doc_freq, n_docs: docs.len(), idf })
}

/// Map tokens to an L2-normalized tf-idf vector. Unseen terms are dropped;
/// an all-unseen input yields the zero vector.
pub fn transform(model: &TfidfModel, tokens: &[String]) -> SparseVector {
    let mut counts: HashMap<TermId, f64> = HashMap::new();
    for token in tokens {
        if let Some(id) = model.term_id(token) {
            *counts.entry(id).or_insert(0.0) += 1.0;
        }
    }
    let mut entries: Vec<(TermId, f64)> =
        counts.into_iter().map(|(id, tf)| (id, tf * model.idf(id))).collect();
    entries.sort_by_key(|&(id, _)| id);
    let mut vector = SparseVector {
        indices: entries.iter().map(|&(id, _)| id).collect(),
        values: entries.iter().map(|&(_, v)| v).collect(),
    };
    vector.normalize();
    vector
}

/// Inverted index with document lengths, for BM25 scoring.
#[derive(Debug, Clone)]
pub struct InvertedIndex {
    term_index: HashMap<String, TermId>,
    postings: Vec<Vec<(usize, u32)>>, // per term, sorted by doc id
    doc_len: Vec<usize>,
    avg_doc_len: f64,
}

impl InvertedIndex {
    /// Build an index over tokenized documents; doc ids are positions in `docs`.
    pub fn build(docs: &[Vec<String>]) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::Usage("inverted index requires at least one document".into()));
        }
        let mut term_index: HashMap<String, TermId> = HashMap::new();
        let mut postings: Vec<Vec<(usize, u32)>> = Vec::new();
        for (doc_idx, tokens) in docs.iter().enumerate() {
            let mut tf: HashMap<TermId, u32> = HashMap::new();
            for token in tokens {
                let id = match term_index.get(token) {
                    Some(&id) => id,
                    None => {
                        let id = postings.len();
                        term_index.insert(token.clone(), id);
                        postings.push(Vec::new());
                        id
                    }
                };
                *tf.entry(id).or_insert(0) += 1;
            }
            let mut entries: Vec<(TermId, u32)> = tf.into_iter().collect();
            entries.sort_by_key(|&(id, _)| id);
            for (id, count) in entries {
                postings[id].push((doc_idx, count));
            }
        }
        let doc_len: Vec<usize> = docs.iter().map(|d| d.len()).collect();
        let avg_doc_len = doc_len.iter().sum::<usize>() as f64 / doc_len.len() as f64;
        Ok(InvertedIndex { term_index, postings, doc_len, avg_doc_len })
    }

    pub fn n_docs(&self) -> usize {
        self.doc_len.len()
    }

    pub fn doc_len(&self, doc: usize) -> usize {
        self.doc_len[doc]
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.avg_doc_len
    }

    fn term_frequency(&self, term: TermId, doc: usize) -> u32 {
        let list = &self.postings[term];
        match list.binary_search_by_key(&doc, |&(d, _)| d) {
            Ok(pos) => list[pos].1,
            Err(_) => 0,
        }
    }
}

pub const BM25_K1: f64 = 1.2;
pub const BM25_B: f64 = 0.75;

/// BM25 score of a document against a token query. Query terms absent from
/// the index contribute 0. Uses idf = ln(1 + (N - df + 0.5)/(df + 0.5)),
/// which stays non-negative even for df > N/2.
pub fn bm25_score(
    index: &InvertedIndex,
    query: &[String],
    doc: usize,
    k1: f64,
    b: f64,
) -> Result<f64> {
    if doc >= index.n_docs() {
        return Err(Error::Usage(format!("unknown document id {doc} in BM25 scoring")));
    }
    let n = index.n_docs() as f64;
    let len_norm = 1.0 - b + b * index.doc_len(doc) as f64 / index.avg_doc_len();
    let mut score = 0.0;
    for token in query {
        let Some(&term) = index.term_index.get(token) else { continue };
        let tf = index.term_frequency(term, doc) as f64;
        if tf == 0.0 {
            continue;
        }
        let df = index.postings[term].len() as f64;
        let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
        score += idf * tf * (k1 + 1.0) / (tf + k1 * len_norm);
    }
    Ok(score)
}
