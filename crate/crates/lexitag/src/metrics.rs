//! Confusion accounting and the reported scores: micro/macro F1, per-label
//! breakdowns, frequency- and length-bucketed views, and relevance-score
//! aggregation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{FrequencyBuckets, LabelId, LabelVocabulary};
use crate::error::{Error, Result};

/// Per-label true/false positive and false negative counts over a scored
/// document set.
#[derive(Debug, Clone)]
pub struct ConfusionCounts {
    pub tp: Vec<u64>,
    pub fp: Vec<u64>,
    pub fn_: Vec<u64>,
    pub n_docs_scored: usize,
    /// Gold documents with no prediction record (scored as empty sets).
    pub missing_predictions: usize,
}

impl ConfusionCounts {
    pub fn n_labels(&self) -> usize {
        self.tp.len()
    }

    /// Labels with gold support >= 1 in the scored split. This is the
    /// default macro-averaging set; predicted-but-unsupported labels still
    /// contribute fp to micro.
    pub fn default_macro_set(&self) -> BTreeSet<LabelId> {
        (0..self.n_labels())
            .filter(|&l| self.tp[l] + self.fn_[l] > 0)
            .collect()
    }

    pub fn per_label_f1(&self, label: LabelId) -> f64 {
        let denom = 2 * self.tp[label] + self.fp[label] + self.fn_[label];
        if denom == 0 {
            0.0
        } else {
            2.0 * self.tp[label] as f64 / denom as f64
        }
    }

    pub fn per_label_precision(&self, label: LabelId) -> f64 {
        let denom = self.tp[label] + self.fp[label];
        if denom == 0 {
            0.0
        } else {
            self.tp[label] as f64 / denom as f64
        }
    }

    pub fn per_label_recall(&self, label: LabelId) -> f64 {
        let denom = self.tp[label] + self.fn_[label];
        if denom == 0 {
            0.0
        } else {
            self.tp[label] as f64 / denom as f64
        }
    }
}

/// Tally per-label confusion counts. Gold documents missing from `pred`
/// count as empty predictions; predictions for unknown documents are a
/// data error.
pub fn confusion(
    gold: &BTreeMap<String, BTreeSet<LabelId>>,
    pred: &BTreeMap<String, BTreeSet<LabelId>>,
    vocab: &LabelVocabulary,
) -> Result<ConfusionCounts> {
    for doc_id in pred.keys() {
        if !gold.contains_key(doc_id) {
            return Err(Error::Data(format!(
                "prediction for unknown document {doc_id:?}"
            )));
        }
    }
    let n_labels = vocab.len();
    let mut counts = ConfusionCounts {
        tp: vec![0; n_labels],
        fp: vec![0; n_labels],
        fn_: vec![0; n_labels],
        n_docs_scored: gold.len(),
        missing_predictions: 0,
    };
    let empty = BTreeSet::new();
    for (doc_id, gold_set) in gold {
        let pred_set = match pred.get(doc_id) {
            Some(set) => set,
            None => {
                counts.missing_predictions += 1;
                &empty
            }
        };
        for &l in gold_set {
            if l >= n_labels {
                return Err(Error::Data(format!("gold label id {l} out of vocabulary")));
            }
            if pred_set.contains(&l) {
                counts.tp[l] += 1;
            } else {
                counts.fn_[l] += 1;
            }
        }
        for &l in pred_set {
            if l >= n_labels {
                return Err(Error::Data(format!("predicted label id {l} out of vocabulary")));
            }
            if !gold_set.contains(&l) {
                counts.fp[l] += 1;
            }
        }
    }
    Ok(counts)
}

/// Pooled F1 over all (document, label) decisions. Zero denominator yields 0.0.
pub fn micro_f1(counts: &ConfusionCounts) -> f64 {
    let tp: u64 = counts.tp.iter().sum();
    let fp: u64 = counts.fp.iter().sum();
    let fn_: u64 = counts.fn_.iter().sum();
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// Unweighted mean of per-label F1 over `macro_set`. Per-label zero
/// denominators score 0.0.
pub fn macro_f1(counts: &ConfusionCounts, macro_set: &BTreeSet<LabelId>) -> Result<f64> {
    if macro_set.is_empty() {
        return Err(Error::Usage("macro_f1 requires a non-empty label set".into()));
    }
    let sum: f64 = macro_set.iter().map(|&l| counts.per_label_f1(l)).sum();
    Ok(sum / macro_set.len() as f64)
}

/// Macro-F1 restricted to each frequency bucket's intersection with the
/// default macro set. Buckets with empty intersections are omitted.
pub fn bucketed_macro_f1(
    counts: &ConfusionCounts,
    buckets: &FrequencyBuckets,
) -> BTreeMap<String, f64> {
    let macro_set = counts.default_macro_set();
    let mut out = BTreeMap::new();
    for (name, bucket) in [
        ("high", &buckets.high),
        ("medium", &buckets.medium),
        ("low", &buckets.low),
    ] {
        let restricted: BTreeSet<LabelId> =
            bucket.intersection(&macro_set).copied().collect();
        if restricted.is_empty() {
            continue;
        }
        out.insert(
            name.to_string(),
            macro_f1(counts, &restricted).expect("non-empty restricted set"),
        );
    }
    out
}

/// Per-bucket scores in a length-bucketed report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BucketScores {
    pub micro_f1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub macro_f1: Option<f64>,
    pub n_docs: usize,
}

/// Score each length bucket independently: confusion, micro and macro F1
/// computed over that bucket's documents only. An empty bucket reports
/// micro 0.0 with macro omitted.
pub fn length_bucketed_report(
    gold: &BTreeMap<String, BTreeSet<LabelId>>,
    pred: &BTreeMap<String, BTreeSet<LabelId>>,
    length_partition: &BTreeMap<String, BTreeSet<String>>,
    vocab: &LabelVocabulary,
) -> Result<BTreeMap<String, BucketScores>> {
    let mut out = BTreeMap::new();
    for (bucket, doc_ids) in length_partition {
        let bucket_gold: BTreeMap<String, BTreeSet<LabelId>> = gold
            .iter()
            .filter(|(id, _)| doc_ids.contains(*id))
            .map(|(id, set)| (id.clone(), set.clone()))
            .collect();
        let bucket_pred: BTreeMap<String, BTreeSet<LabelId>> = pred
            .iter()
            .filter(|(id, _)| doc_ids.contains(*id))
            .map(|(id, set)| (id.clone(), set.clone()))
            .collect();
        let counts = confusion(&bucket_gold, &bucket_pred, vocab)?;
        let macro_set = counts.default_macro_set();
        let macro_score = if macro_set.is_empty() {
            None
        } else {
            Some(macro_f1(&counts, &macro_set)?)
        };
        out.insert(
            bucket.clone(),
            BucketScores {
                micro_f1: micro_f1(&counts),
                macro_f1: macro_score,
                n_docs: bucket_gold.len(),
            },
        );
    }
    Ok(out)
}

/// One human relevance judgment on the 1..5 scale.
#[derive(Debug, Clone)]
pub struct RelevanceScore {
    pub doc_id: String,
    pub rater: String,
    pub label_rank: u32,
    pub score: u8,
}

/// Arithmetic mean over all (doc, rater, rank) judgments.
pub fn relevance_aggregate(scores: &[RelevanceScore]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::Usage("no relevance scores to aggregate".into()));
    }
    let mut sum = 0.0;
    for s in scores {
        if !(1..=5).contains(&s.score) {
            return Err(Error::Data(format!(
                "relevance score {} for document {:?} outside 1..5",
                s.score, s.doc_id
            )));
        }
        sum += s.score as f64;
    }
    Ok(sum / scores.len() as f64)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerLabelEntry {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Coverage {
    pub n_docs_scored: usize,
    pub missing_predictions: usize,
}

/// Full evaluation report; serializes with a fixed key order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub version: u32,
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub n_docs: usize,
    pub coverage: Coverage,
    pub per_label: Vec<PerLabelEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency_buckets: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length_buckets: Option<BTreeMap<String, BucketScores>>,
}

/// Assemble a report from confusion counts, with labels sorted ascending.
pub fn build_report(
    counts: &ConfusionCounts,
    vocab: &LabelVocabulary,
    frequency_buckets: Option<BTreeMap<String, f64>>,
    length_buckets: Option<BTreeMap<String, BucketScores>>,
) -> Result<MetricsReport> {
    let macro_set = counts.default_macro_set();
    let macro_score = if macro_set.is_empty() {
        0.0
    } else {
        macro_f1(counts, &macro_set)?
    };
    let mut per_label: Vec<PerLabelEntry> = (0..counts.n_labels())
        .filter(|&l| counts.tp[l] + counts.fp[l] + counts.fn_[l] > 0)
        .map(|l| PerLabelEntry {
            label: vocab.label(l).to_string(),
            precision: counts.per_label_precision(l),
            recall: counts.per_label_recall(l),
            f1: counts.per_label_f1(l),
            support: counts.tp[l] + counts.fn_[l],
        })
        .collect();
    per_label.sort_by(|a, b| a.label.cmp(&b.label));
    Ok(MetricsReport {
        version: 1,
        micro_f1: micro_f1(counts),
        macro_f1: macro_score,
        n_docs: counts.n_docs_scored,
        coverage: Coverage {
            n_docs_scored: counts.n_docs_scored,
            missing_predictions: counts.missing_predictions,
        },
        per_label,
        frequency_buckets,
        length_buckets,
    })
}
