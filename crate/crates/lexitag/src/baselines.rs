//! Classical predictors: per-label TF-IDF centroids, kNN over document
//! vectors, and BM25 with labels as queries, plus the shared score-to-label
//! decision policy and its validation-grid calibration.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::corpus::{Corpus, LabelId, LabelVocabulary};
use crate::error::{Error, Result};
use crate::metrics;
use crate::text::{
    bm25_score, cosine_similarity, tokenize, InvertedIndex, SparseVector, TfidfModel, BM25_B,
    BM25_K1,
};

/// Rule converting continuous per-label scores into a discrete label set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecisionPolicy {
    TopK(usize),
    Threshold(f64),
}

impl DecisionPolicy {
    /// Parse the CLI syntax `topk:K` or `threshold:T`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, value) = spec
            .split_once(':')
            .ok_or_else(|| Error::Usage(format!("bad policy {spec:?}, expected topk:K or threshold:T")))?;
        match kind {
            "topk" => {
                let k: usize = value
                    .parse()
                    .map_err(|_| Error::Usage(format!("bad top-k value {value:?}")))?;
                if k == 0 {
                    return Err(Error::Usage("top-k requires k >= 1".into()));
                }
                Ok(DecisionPolicy::TopK(k))
            }
            "threshold" => {
                let tau: f64 = value
                    .parse()
                    .map_err(|_| Error::Usage(format!("bad threshold value {value:?}")))?;
                Ok(DecisionPolicy::Threshold(tau))
            }
            other => Err(Error::Usage(format!("unknown policy kind {other:?}"))),
        }
    }
}

impl std::fmt::Display for DecisionPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DecisionPolicy::TopK(k) => write!(f, "topk:{k}"),
            DecisionPolicy::Threshold(tau) => write!(f, "threshold:{tau}"),
        }
    }
}

/// Per-document label scores, sorted by score descending then canonical
/// label ascending.
#[derive(Debug, Clone)]
pub struct ScoredLabels(pub Vec<(LabelId, f64)>);

impl ScoredLabels {
    /// Sort raw (label, score) pairs into the canonical order.
    pub fn from_scores(mut scores: Vec<(LabelId, f64)>, vocab: &LabelVocabulary) -> Self {
        scores.sort_by(|&(la, sa), &(lb, sb)| {
            sb.partial_cmp(&sa)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| vocab.label(la).cmp(vocab.label(lb)))
        });
        ScoredLabels(scores)
    }

    /// Apply a decision policy to the scored list.
    pub fn decide(&self, policy: &DecisionPolicy) -> BTreeSet<LabelId> {
        match *policy {
            DecisionPolicy::TopK(k) => self.0.iter().take(k).map(|&(l, _)| l).collect(),
            DecisionPolicy::Threshold(tau) => {
                self.0.iter().take_while(|&&(_, s)| s >= tau).map(|&(l, _)| l).collect()
            }
        }
    }
}

/// Fitted per-label centroid vectors; entries are `None` for labels that
/// had no training documents (warned and skipped at fit time).
#[derive(Debug, Clone)]
pub struct ClassTfidfModel {
    pub centroids: Vec<Option<SparseVector>>,
}

/// Build one L2-normalized centroid per label from the mean of its
/// training document vectors.
pub fn classtfidf_fit(train: &Corpus, tfidf: &TfidfModel) -> Result<ClassTfidfModel> {
    let n_labels = train.vocabulary.len();
    let mut sums: Vec<HashMap<usize, f64>> = vec![HashMap::new(); n_labels];
    let mut doc_counts = vec![0usize; n_labels];
    for doc in &train.documents {
        let vector = crate::text::transform(tfidf, &tokenize(&doc.text));
        for &label in &doc.labels {
            doc_counts[label] += 1;
            for (&idx, &val) in vector.indices.iter().zip(&vector.values) {
                *sums[label].entry(idx).or_insert(0.0) += val;
            }
        }
    }
    let mut centroids = Vec::with_capacity(n_labels);
    for label in 0..n_labels {
        if doc_counts[label] == 0 {
            log::warn!(
                "label {:?} has no training documents; it can never be predicted by ClassTFIDF",
                train.vocabulary.label(label)
            );
            centroids.push(None);
            continue;
        }
        let mut entries: Vec<(usize, f64)> = sums[label]
            .iter()
            .map(|(&idx, &sum)| (idx, sum / doc_counts[label] as f64))
            .collect();
        entries.sort_by_key(|&(idx, _)| idx);
        let mut centroid = SparseVector {
            indices: entries.iter().map(|&(i, _)| i).collect(),
            values: entries.iter().map(|&(_, v)| v).collect(),
        };
        centroid.normalize();
        centroids.push(Some(centroid));
    }
    Ok(ClassTfidfModel { centroids })
}

/// Score every label by cosine against its centroid.
pub fn classtfidf_score(
    model: &ClassTfidfModel,
    doc_vector: &SparseVector,
    vocab: &LabelVocabulary,
) -> ScoredLabels {
    let scores: Vec<(LabelId, f64)> = model
        .centroids
        .iter()
        .enumerate()
        .filter_map(|(label, centroid)| {
            centroid
                .as_ref()
                .map(|c| (label, cosine_similarity(doc_vector, c)))
        })
        .collect();
    ScoredLabels::from_scores(scores, vocab)
}

pub fn classtfidf_predict(
    model: &ClassTfidfModel,
    doc_vector: &SparseVector,
    policy: &DecisionPolicy,
    vocab: &LabelVocabulary,
) -> BTreeSet<LabelId> {
    if doc_vector.is_empty() {
        log::warn!("scoring a zero document vector; predictions are degenerate");
    }
    classtfidf_score(model, doc_vector, vocab).decide(policy)
}

pub const DEFAULT_KNN_K: usize = 5;

/// Score candidate labels by similarity-weighted voting over the k nearest
/// training documents. Each label's score is the summed similarity of the
/// neighbors carrying it, normalized by the total similarity of all k
/// neighbors; scores lie in [0, 1].
pub fn doctfidf_score(
    train: &Corpus,
    train_vectors: &[SparseVector],
    doc_vector: &SparseVector,
    k: usize,
    vocab: &LabelVocabulary,
) -> Result<ScoredLabels> {
    if train.is_empty() {
        return Err(Error::Usage("kNN prediction requires a non-empty training corpus".into()));
    }
    if k == 0 || k > train.len() {
        return Err(Error::Usage(format!(
            "k must lie in 1..={}, got {k}",
            train.len()
        )));
    }
    let mut sims: Vec<(usize, f64)> = train_vectors
        .iter()
        .enumerate()
        .map(|(i, v)| (i, cosine_similarity(doc_vector, v)))
        .collect();
    // stable order: similarity descending, document position ascending
    sims.sort_by(|&(ia, sa), &(ib, sb)| {
        sb.partial_cmp(&sa).unwrap_or(std::cmp::Ordering::Equal).then(ia.cmp(&ib))
    });
    sims.truncate(k);
    let total: f64 = sims.iter().map(|&(_, s)| s).sum();
    if total == 0.0 {
        log::warn!("query has zero similarity to every training document");
        return Ok(ScoredLabels(Vec::new()));
    }
    let mut votes: HashMap<LabelId, f64> = HashMap::new();
    for &(doc_idx, sim) in &sims {
        for &label in &train.documents[doc_idx].labels {
            *votes.entry(label).or_insert(0.0) += sim;
        }
    }
    let scores: Vec<(LabelId, f64)> =
        votes.into_iter().map(|(l, s)| (l, s / total)).collect();
    Ok(ScoredLabels::from_scores(scores, vocab))
}

pub fn doctfidf_predict(
    train: &Corpus,
    train_vectors: &[SparseVector],
    doc_vector: &SparseVector,
    k: usize,
    policy: &DecisionPolicy,
    vocab: &LabelVocabulary,
) -> Result<BTreeSet<LabelId>> {
    Ok(doctfidf_score(train, train_vectors, doc_vector, k, vocab)?.decide(policy))
}

/// Tokenize each label's canonical string into its BM25 query. A label
/// whose name yields no tokens cannot be used as a query.
pub fn build_label_queries(vocab: &LabelVocabulary) -> Result<BTreeMap<LabelId, Vec<String>>> {
    let mut queries = BTreeMap::new();
    for id in 0..vocab.len() {
        let tokens = tokenize(vocab.label(id));
        if tokens.is_empty() {
            return Err(Error::Config(format!(
                "label {:?} tokenizes to an empty BM25 query",
                vocab.label(id)
            )));
        }
        queries.insert(id, tokens);
    }
    Ok(queries)
}

/// Score each label as a BM25 query against the document.
pub fn bm25_label_scores(
    index: &InvertedIndex,
    label_queries: &BTreeMap<LabelId, Vec<String>>,
    doc: usize,
    vocab: &LabelVocabulary,
) -> Result<ScoredLabels> {
    let mut scores = Vec::with_capacity(label_queries.len());
    for (&label, query) in label_queries {
        scores.push((label, bm25_score(index, query, doc, BM25_K1, BM25_B)?));
    }
    Ok(ScoredLabels::from_scores(scores, vocab))
}

pub fn bm25_predict(
    index: &InvertedIndex,
    label_queries: &BTreeMap<LabelId, Vec<String>>,
    doc: usize,
    policy: &DecisionPolicy,
    vocab: &LabelVocabulary,
) -> Result<BTreeSet<LabelId>> {
    Ok(bm25_label_scores(index, label_queries, doc, vocab)?.decide(policy))
}

/// Pick the grid policy with the highest validation micro-F1; ties go to
/// the earlier grid position.
pub fn calibrate_policy(
    scored: &BTreeMap<String, ScoredLabels>,
    gold: &BTreeMap<String, BTreeSet<LabelId>>,
    grid: &[DecisionPolicy],
    vocab: &LabelVocabulary,
) -> Result<DecisionPolicy> {
    if scored.is_empty() {
        return Err(Error::Usage("calibration requires a non-empty validation set".into()));
    }
    if grid.is_empty() {
        return Err(Error::Usage("calibration requires a non-empty policy grid".into()));
    }
    let mut best: Option<(DecisionPolicy, f64)> = None;
    for policy in grid {
        let pred: BTreeMap<String, BTreeSet<LabelId>> = scored
            .iter()
            .map(|(id, s)| (id.clone(), s.decide(policy)))
            .collect();
        let counts = metrics::confusion(gold, &pred, vocab)?;
        let score = metrics::micro_f1(&counts);
        if best.as_ref().is_none_or(|&(_, b)| score > b) {
            best = Some((*policy, score));
        }
    }
    Ok(best.expect("non-empty grid").0)
}

/// Parse a CLI grid spec: comma-separated policies, e.g.
/// `topk:1,topk:2,threshold:0.3`.
pub fn parse_grid(spec: &str) -> Result<Vec<DecisionPolicy>> {
    spec.split(',').map(DecisionPolicy::parse).collect()
}
