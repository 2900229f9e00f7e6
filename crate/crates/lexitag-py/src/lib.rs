//! Python bindings for the lexitag toolkit: tokenization, TF-IDF and
//! BM25 scoring, generation parsing, and multi-label evaluation.

use std::collections::{BTreeMap, BTreeSet};

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use lexitag::corpus::{LabelId, LabelVocabulary};
use lexitag::error::Error;
use lexitag::labelparse::ParseOptions;
use lexitag::metrics::{confusion, macro_f1, micro_f1};
use lexitag::text::{self, TfidfModel, BM25_B, BM25_K1};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn vocab_from_names(names: &[String]) -> PyResult<LabelVocabulary> {
    let mut vocab = LabelVocabulary::default();
    for name in names {
        let canonical = lexitag::corpus::canonicalize_label(name).map_err(to_py_err)?;
        vocab.get_or_insert(&canonical);
    }
    Ok(vocab)
}

/// Lowercased Unicode alphanumeric-run tokenization.
#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    text::tokenize(text)
}

/// Canonical label form: lowercased, whitespace collapsed. Raises
/// ValueError on empty input.
#[pyfunction]
fn canonicalize_label(label: &str) -> PyResult<String> {
    lexitag::corpus::canonicalize_label(label).map_err(to_py_err)
}

/// Render a label set the way fine-tuning targets are written:
/// canonical names, sorted, joined with ", ".
#[pyfunction]
fn label_sequence(labels: Vec<String>) -> PyResult<String> {
    let mut canonical = BTreeSet::new();
    for label in &labels {
        canonical.insert(lexitag::corpus::canonicalize_label(label).map_err(to_py_err)?);
    }
    let mut vocab = LabelVocabulary::default();
    let ids: BTreeSet<LabelId> = canonical.iter().map(|n| vocab.get_or_insert(n)).collect();
    lexitag::prompting::label_sequence(&ids, &vocab).map_err(to_py_err)
}

/// Parse a free-form generation against a valid-label list. Returns
/// (labels, unknown_fragments, duplicate_count).
#[pyfunction]
#[pyo3(signature = (generation, valid_labels, strict = false))]
fn parse_generation(
    generation: &str,
    valid_labels: Vec<String>,
    strict: bool,
) -> PyResult<(Vec<String>, Vec<String>, usize)> {
    let vocab = vocab_from_names(&valid_labels)?;
    let opts = ParseOptions { strict, ..ParseOptions::default() };
    let parsed =
        lexitag::labelparse::parse_generation(generation, &vocab, &opts).map_err(to_py_err)?;
    let labels = parsed.labels.iter().map(|&l| vocab.label(l).to_string()).collect();
    Ok((labels, parsed.unknown, parsed.duplicates))
}

/// Micro and macro F1 over gold/predicted label-name sets keyed by
/// document id. Macro averages over labels with gold support.
#[pyfunction]
fn evaluate(
    gold: BTreeMap<String, Vec<String>>,
    pred: BTreeMap<String, Vec<String>>,
) -> PyResult<(f64, f64)> {
    let mut vocab = LabelVocabulary::default();
    let mut map_sets = |sets: &BTreeMap<String, Vec<String>>| -> PyResult<BTreeMap<String, BTreeSet<LabelId>>> {
        let mut out = BTreeMap::new();
        for (doc, names) in sets {
            let mut ids = BTreeSet::new();
            for name in names {
                let canonical =
                    lexitag::corpus::canonicalize_label(name).map_err(to_py_err)?;
                ids.insert(vocab.get_or_insert(&canonical));
            }
            out.insert(doc.clone(), ids);
        }
        Ok(out)
    };
    let gold_sets = map_sets(&gold)?;
    let pred_sets = map_sets(&pred)?;
    let counts = confusion(&gold_sets, &pred_sets, &vocab).map_err(to_py_err)?;
    let micro = micro_f1(&counts);
    let macro_set = counts.default_macro_set();
    let macro_ = if macro_set.is_empty() {
        0.0
    } else {
        macro_f1(&counts, &macro_set).map_err(to_py_err)?
    };
    Ok((micro, macro_))
}

/// Deterministic synthetic corpus as a JSONL string.
#[pyfunction]
fn make_fixture(n_docs: usize, n_labels: usize, seed: u64) -> String {
    lexitag::fixture::make_fixture(n_docs, n_labels, seed)
}

/// TF-IDF vectorizer fitted on tokenized documents.
#[pyclass]
struct Tfidf {
    model: TfidfModel,
}

#[pymethods]
impl Tfidf {
    #[new]
    fn new(docs: Vec<Vec<String>>) -> PyResult<Self> {
        Ok(Tfidf { model: text::fit_tfidf(&docs).map_err(to_py_err)? })
    }

    fn n_terms(&self) -> usize {
        self.model.n_terms()
    }

    fn n_docs(&self) -> usize {
        self.model.n_docs()
    }

    /// L2-normalized sparse vector as (term_id, value) pairs.
    fn transform(&self, tokens: Vec<String>) -> Vec<(usize, f64)> {
        let v = text::transform(&self.model, &tokens);
        v.indices.into_iter().zip(v.values).collect()
    }

    /// Cosine similarity of two tokenized documents in this space.
    fn cosine(&self, a: Vec<String>, b: Vec<String>) -> f64 {
        let va = text::transform(&self.model, &a);
        let vb = text::transform(&self.model, &b);
        text::cosine_similarity(&va, &vb)
    }

    fn to_json(&self) -> String {
        self.model.to_json()
    }

    #[staticmethod]
    fn from_json(json: &str) -> PyResult<Self> {
        Ok(Tfidf { model: TfidfModel::from_json(json).map_err(to_py_err)? })
    }
}

/// BM25 index over tokenized documents (k1 = 1.2, b = 0.75).
#[pyclass]
struct Bm25 {
    index: text::InvertedIndex,
}

#[pymethods]
impl Bm25 {
    #[new]
    fn new(docs: Vec<Vec<String>>) -> PyResult<Self> {
        Ok(Bm25 { index: text::InvertedIndex::build(&docs).map_err(to_py_err)? })
    }

    fn n_docs(&self) -> usize {
        self.index.n_docs()
    }

    fn score(&self, query: Vec<String>, doc: usize) -> PyResult<f64> {
        text::bm25_score(&self.index, &query, doc, BM25_K1, BM25_B).map_err(to_py_err)
    }
}

#[pymodule]
fn lexitag_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(canonicalize_label, m)?)?;
    m.add_function(wrap_pyfunction!(label_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(parse_generation, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(make_fixture, m)?)?;
    m.add_class::<Tfidf>()?;
    m.add_class::<Bm25>()?;
    Ok(())
}
