//! One-vs-all logistic classifier over TF-IDF features, trained by
//! mini-batch gradient descent with optional inverse-frequency label
//! weighting. This is the desk-scale testbed for the weighted-loss
//! ablation.

use std::collections::BTreeSet;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, LabelId, LabelVocabulary};
use crate::error::{Error, Result};
use crate::text::{tokenize, transform, SparseVector, TfidfModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    None,
    InverseFrequency,
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Weighting::None),
            "inverse_frequency" => Ok(Weighting::InverseFrequency),
            other => Err(Error::Usage(format!("unknown weighting mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2: f64,
    pub weighting: Weighting,
    pub clip: (f64, f64),
    pub seed: u64,
    pub threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 50,
            batch_size: 32,
            l2: 1e-4,
            weighting: Weighting::None,
            clip: (0.1, 10.0),
            seed: 42,
            threshold: 0.5,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 {
            return Err(Error::Usage("learning rate must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Usage("batch size must be positive".into()));
        }
        if self.l2 < 0.0 {
            return Err(Error::Usage("l2 penalty must be non-negative".into()));
        }
        if self.clip.0 > self.clip.1 {
            return Err(Error::Usage("weight clip bounds must satisfy w_min <= w_max".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Usage("threshold must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Per-label loss weights: inverse frequency, mean-normalized, then
/// clipped into [w_min, w_max].
#[derive(Debug, Clone)]
pub struct LabelWeights(pub Vec<f64>);

/// raw_l = n_docs / (L * count_l), normalized to mean 1 over the counted
/// labels, then clamped.
pub fn inverse_frequency_weights(
    counts: &[u64],
    n_docs: usize,
    clip: (f64, f64),
) -> Result<LabelWeights> {
    if counts.is_empty() {
        return Err(Error::Config("no labels to weight".into()));
    }
    let n_labels = counts.len() as f64;
    let mut raw = Vec::with_capacity(counts.len());
    for (id, &count) in counts.iter().enumerate() {
        if count == 0 {
            return Err(Error::Config(format!(
                "label id {id} has zero training count; weights are only defined over training labels"
            )));
        }
        raw.push(n_docs as f64 / (n_labels * count as f64));
    }
    let mean = raw.iter().sum::<f64>() / n_labels;
    let weights = raw
        .into_iter()
        .map(|r| (r / mean).clamp(clip.0, clip.1))
        .collect();
    Ok(LabelWeights(weights))
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Numerically stable per-term BCE: max(z,0) - z*y + ln(1 + e^-|z|).
fn bce_term(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// Weighted binary cross-entropy averaged over the batch dimension:
/// (1/B) * sum_i sum_l w_l * bce(z_il, y_il).
pub fn weighted_bce_loss(
    logits: &[Vec<f64>],
    targets: &[Vec<f64>],
    weights: &LabelWeights,
) -> Result<f64> {
    let batch = logits.len();
    if batch != targets.len() {
        return Err(Error::Usage("logit and target batch sizes differ".into()));
    }
    let mut total = 0.0;
    for (zs, ys) in logits.iter().zip(targets) {
        if zs.len() != weights.0.len() || ys.len() != weights.0.len() {
            return Err(Error::Usage("label dimension mismatch in loss".into()));
        }
        for ((&z, &y), &w) in zs.iter().zip(ys).zip(&weights.0) {
            if !z.is_finite() {
                return Err(Error::Numeric(format!("non-finite logit {z}")));
            }
            total += w * bce_term(z, y);
        }
    }
    Ok(total / batch as f64)
}

/// Per-label weight vectors and biases over the TF-IDF term space.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub labels: Vec<String>,
    pub terms: Vec<String>,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

/// FNV-1a over the term list and label list; stable across platforms.
pub fn vocab_fingerprint(terms: &[String], labels: &[String]) -> u64 {
    const OFFSET: u64 = 0xcbf29ce484222325;
    const PRIME: u64 = 0x100000001b3;
    let mut hash = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= b as u64;
            hash = hash.wrapping_mul(PRIME);
        }
    };
    for term in terms {
        eat(term.as_bytes());
        eat(&[0]);
    }
    eat(&[1]);
    for label in labels {
        eat(label.as_bytes());
        eat(&[0]);
    }
    hash
}

impl LinearModel {
    pub fn zeros(labels: Vec<String>, terms: Vec<String>) -> Self {
        let n_terms = terms.len();
        let weights = vec![vec![0.0; n_terms]; labels.len()];
        let bias = vec![0.0; labels.len()];
        LinearModel { labels, terms, weights, bias }
    }

    pub fn fingerprint(&self) -> u64 {
        vocab_fingerprint(&self.terms, &self.labels)
    }

    /// Fail if the model was trained over a different term or label space.
    pub fn check_compatible(&self, tfidf: &TfidfModel, vocab: &LabelVocabulary) -> Result<()> {
        let expected = vocab_fingerprint(tfidf.terms(), vocab.labels());
        if expected != self.fingerprint() {
            return Err(Error::Config(
                "model vocabulary fingerprint does not match the vectorizer in use".into(),
            ));
        }
        Ok(())
    }

    pub fn logit(&self, label: LabelId, x: &SparseVector) -> f64 {
        let mut z = self.bias[label];
        let row = &self.weights[label];
        for (&idx, &val) in x.indices.iter().zip(&x.values) {
            z += row[idx] * val;
        }
        z
    }

    /// Labels with sigmoid(w·x + b) >= threshold. The boundary is inclusive.
    pub fn predict(&self, x: &SparseVector, threshold: f64) -> BTreeSet<LabelId> {
        (0..self.labels.len())
            .filter(|&l| sigmoid(self.logit(l, x)) >= threshold)
            .collect()
    }
}

/// Analytic gradients of the weighted BCE plus an L2 penalty on the
/// weights (biases are not penalized). dL/dz = w_l * (sigmoid(z) - y) / B.
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

pub fn loss_gradient(
    features: &[SparseVector],
    targets: &[Vec<f64>],
    weights: &LabelWeights,
    model: &LinearModel,
    l2: f64,
) -> Result<Gradients> {
    let batch = features.len();
    if batch != targets.len() {
        return Err(Error::Usage("feature and target batch sizes differ".into()));
    }
    let n_labels = model.labels.len();
    let n_terms = model.terms.len();
    let mut grad_w = vec![vec![0.0; n_terms]; n_labels];
    let mut grad_b = vec![0.0; n_labels];
    for (x, ys) in features.iter().zip(targets) {
        for label in 0..n_labels {
            let z = model.logit(label, x);
            let dz = weights.0[label] * (sigmoid(z) - ys[label]) / batch as f64;
            grad_b[label] += dz;
            let row = &mut grad_w[label];
            for (&idx, &val) in x.indices.iter().zip(&x.values) {
                row[idx] += dz * val;
            }
        }
    }
    if l2 > 0.0 {
        for (grad_row, weight_row) in grad_w.iter_mut().zip(&model.weights) {
            for (g, &w) in grad_row.iter_mut().zip(weight_row) {
                *g += l2 * w;
            }
        }
    }
    Ok(Gradients { weights: grad_w, bias: grad_b })
}

/// Total objective on a document set: weighted BCE plus (l2/2)*|W|^2.
pub fn full_loss(
    features: &[SparseVector],
    targets: &[Vec<f64>],
    weights: &LabelWeights,
    model: &LinearModel,
    l2: f64,
) -> Result<f64> {
    let logits: Vec<Vec<f64>> = features
        .iter()
        .map(|x| (0..model.labels.len()).map(|l| model.logit(l, x)).collect())
        .collect();
    let mut loss = weighted_bce_loss(&logits, targets, weights)?;
    if l2 > 0.0 {
        let sq: f64 = model
            .weights
            .iter()
            .flat_map(|row| row.iter())
            .map(|w| w * w)
            .sum();
        loss += 0.5 * l2 * sq;
    }
    Ok(loss)
}

pub struct TrainOutcome {
    pub model: LinearModel,
    /// Full-dataset objective after each epoch.
    pub epoch_losses: Vec<f64>,
}

/// Train from zero initialization with seeded per-epoch shuffling.
/// Deterministic under a fixed seed.
pub fn train(corpus: &Corpus, tfidf: &TfidfModel, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::Usage("cannot train on an empty corpus".into()));
    }
    let n_labels = corpus.vocabulary.len();
    if n_labels == 0 {
        return Err(Error::Usage("cannot train with an empty label vocabulary".into()));
    }
    let features: Vec<SparseVector> = corpus
        .documents
        .iter()
        .map(|d| transform(tfidf, &tokenize(&d.text)))
        .collect();
    let targets: Vec<Vec<f64>> = corpus
        .documents
        .iter()
        .map(|d| {
            (0..n_labels)
                .map(|l| if d.labels.contains(&l) { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let label_weights = match config.weighting {
        Weighting::None => LabelWeights(vec![1.0; n_labels]),
        Weighting::InverseFrequency => {
            inverse_frequency_weights(corpus.vocabulary.train_counts(), corpus.len(), config.clip)?
        }
    };
    let mut model = LinearModel::zeros(
        corpus.vocabulary.labels().to_vec(),
        tfidf.terms().to_vec(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let batch_features: Vec<SparseVector> =
                batch.iter().map(|&i| features[i].clone()).collect();
            let batch_targets: Vec<Vec<f64>> =
                batch.iter().map(|&i| targets[i].clone()).collect();
            let grads =
                loss_gradient(&batch_features, &batch_targets, &label_weights, &model, config.l2)?;
            for label in 0..n_labels {
                for (w, g) in model.weights[label].iter_mut().zip(&grads.weights[label]) {
                    *w -= config.learning_rate * g;
                }
                model.bias[label] -= config.learning_rate * grads.bias[label];
            }
        }
        let loss = full_loss(&features, &targets, &label_weights, &model, config.l2)?;
        if !loss.is_finite() {
            return Err(Error::Training(format!("loss diverged at epoch {}", epoch + 1)));
        }
        epoch_losses.push(loss);
    }
    Ok(TrainOutcome { model, epoch_losses })
}

#[derive(Serialize, Deserialize)]
struct VectorizerStats {
    n_docs: usize,
    df: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct SavedConfig {
    train: TrainConfig,
    vectorizer: VectorizerStats,
}

#[derive(Serialize, Deserialize)]
struct SavedModel {
    version: u32,
    labels: Vec<String>,
    terms: Vec<String>,
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
    config: SavedConfig,
}

/// Serialize a model together with its training config and the vectorizer
/// statistics needed to rebuild the TF-IDF transform at prediction time.
/// serialize -> load -> serialize is byte-identical.
pub fn model_to_json(model: &LinearModel, config: &TrainConfig, tfidf: &TfidfModel) -> String {
    let saved = SavedModel {
        version: 1,
        labels: model.labels.clone(),
        terms: model.terms.clone(),
        weights: model.weights.clone(),
        bias: model.bias.clone(),
        config: SavedConfig {
            train: config.clone(),
            vectorizer: VectorizerStats {
                n_docs: tfidf.n_docs(),
                df: (0..tfidf.n_terms()).map(|t| tfidf.doc_freq(t)).collect(),
            },
        },
    };
    serde_json::to_string(&saved).expect("model serialization")
}

pub fn save_model(
    model: &LinearModel,
    config: &TrainConfig,
    tfidf: &TfidfModel,
    path: &Path,
) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(model_to_json(model, config, tfidf).as_bytes())?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Load a saved model plus a TF-IDF model rebuilt from the stored
/// vectorizer statistics.
pub fn load_model(path: &Path) -> Result<(LinearModel, TrainConfig, TfidfModel)> {
    let json = std::fs::read_to_string(path)?;
    let saved: SavedModel =
        serde_json::from_str(&json).map_err(|e| Error::Data(format!("bad model file: {e}")))?;
    if saved.version != 1 {
        return Err(Error::Data(format!("unsupported model version {}", saved.version)));
    }
    if saved.terms.len() != saved.config.vectorizer.df.len() {
        return Err(Error::Data("model term list and df list lengths differ".into()));
    }
    let tfidf_file = serde_json::json!({
        "version": 1,
        "n_docs": saved.config.vectorizer.n_docs,
        "terms": saved
            .terms
            .iter()
            .zip(&saved.config.vectorizer.df)
            .map(|(term, df)| serde_json::json!({"term": term, "df": df}))
            .collect::<Vec<_>>(),
    });
    let tfidf = TfidfModel::from_json(&tfidf_file.to_string())?;
    let model = LinearModel {
        labels: saved.labels,
        terms: saved.terms,
        weights: saved.weights,
        bias: saved.bias,
    };
    Ok((model, saved.config.train, tfidf))
}
