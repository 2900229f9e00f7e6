//! Command-line surface wiring the modules into end-to-end workflows:
//! ingest -> split -> baseline/train -> export prompts -> parse
//! generations -> evaluate -> report.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::baselines::{
    self, build_label_queries, classtfidf_fit, classtfidf_score, doctfidf_score, DecisionPolicy,
    ScoredLabels, DEFAULT_KNN_K,
};
use crate::corpus::{
    self, frequency_buckets, ingest_corpus, length_buckets, Corpus, LabelId, LabelVocabulary,
};
use crate::error::{Error, Result};
use crate::fixture::make_fixture;
use crate::labelparse::{parse_generation_file, ParseOptions};
use crate::linear::{self, TrainConfig, Weighting};
use crate::metrics::{self, build_report};
use crate::prompting::{export_finetune_dataset, template_by_name};
use crate::text::{fit_tfidf, tokenize, transform, InvertedIndex, SparseVector, TfidfModel};

#[derive(Parser)]
#[command(name = "lexitag", about = "Multi-label legal document tagging toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print corpus statistics, or generate a synthetic fixture corpus
    Stats {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Generate a deterministic imbalanced fixture: N docs, L labels, SEED
        #[arg(long = "make-fixture", num_args = 3, value_names = ["N", "L", "SEED"])]
        make_fixture: Option<Vec<u64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deterministic seeded train/test split
    Split {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long = "train-out")]
        train_out: PathBuf,
        #[arg(long = "test-out")]
        test_out: PathBuf,
        #[arg(long)]
        fraction: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Run a classical baseline predictor over a test corpus
    Baseline {
        #[arg(long)]
        method: String,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Fixed decision policy: topk:K or threshold:T
        #[arg(long)]
        policy: Option<String>,
        /// Validation corpus for policy calibration
        #[arg(long)]
        calibrate: Option<PathBuf>,
        /// Comma-separated policy grid for calibration
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = DEFAULT_KNN_K)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the one-vs-all logistic classifier
    Train {
        #[arg(long)]
        train: PathBuf,
        #[arg(long = "out-model")]
        out_model: PathBuf,
        #[arg(long, default_value = "none")]
        weighting: String,
        #[arg(long, default_value_t = 0.1)]
        lr: f64,
        #[arg(long, default_value_t = 50)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch: usize,
        #[arg(long, default_value_t = 1e-4)]
        l2: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Predict label sets with a trained model
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export an instruction fine-tuning dataset
    Prompts {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        template: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse LLM generations into canonical label predictions
    Parse {
        #[arg(long)]
        generations: PathBuf,
        /// Corpus whose vocabulary defines the valid labels
        #[arg(long = "vocab-from")]
        vocab_from: PathBuf,
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        summary: PathBuf,
    },
    /// Score predictions against gold labels and write a report
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long = "freq-buckets")]
        freq_buckets: bool,
        /// Length bucket boundaries, e.g. 256,512
        #[arg(long = "length-buckets")]
        length_buckets: Option<String>,
        #[arg(long)]
        report: PathBuf,
    },
}

/// Predictions JSONL record shared by the baseline, predict, and parse
/// commands.
#[derive(Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub labels: Vec<String>,
}

fn write_text(path: &Path, content: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(content.as_bytes())?;
    Ok(())
}

fn write_predictions(path: &Path, records: &[PredictionRecord]) -> Result<()> {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("prediction serialization"));
        out.push('\n');
    }
    write_text(path, &out)
}

fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    let content = std::fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (line_no, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: PredictionRecord = serde_json::from_str(line).map_err(|e| {
            Error::Data(format!("malformed prediction at line {}: {e}", line_no + 1))
        })?;
        records.push(record);
    }
    Ok(records)
}

fn corpus_to_jsonl(corpus: &Corpus) -> String {
    #[derive(Serialize)]
    struct Record<'a> {
        id: &'a str,
        text: &'a str,
        labels: Vec<&'a str>,
    }
    let mut out = String::new();
    for doc in &corpus.documents {
        let record = Record {
            id: &doc.id,
            text: &doc.text,
            labels: doc.labels.iter().map(|&l| corpus.vocabulary.label(l)).collect(),
        };
        out.push_str(&serde_json::to_string(&record).expect("corpus serialization"));
        out.push('\n');
    }
    out
}

fn label_names(labels: &BTreeSet<LabelId>, vocab: &LabelVocabulary) -> Vec<String> {
    labels.iter().map(|&l| vocab.label(l).to_string()).collect()
}

/// Entry point used by the binary and by tests. Returns the process exit
/// code; diagnostics go to stderr.
pub fn run(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Stats { corpus, make_fixture: fixture_args, out } => {
            cmd_stats(corpus.as_deref(), fixture_args.as_deref(), out.as_deref())
        }
        Command::Split { corpus, train_out, test_out, fraction, seed } => {
            cmd_split(&corpus, &train_out, &test_out, fraction, seed)
        }
        Command::Baseline { method, train, test, policy, calibrate, grid, k, out } => cmd_baseline(
            &method,
            &train,
            &test,
            policy.as_deref(),
            calibrate.as_deref(),
            grid.as_deref(),
            k,
            &out,
        ),
        Command::Train { train, out_model, weighting, lr, epochs, batch, l2, seed } => {
            cmd_train(&train, &out_model, &weighting, lr, epochs, batch, l2, seed)
        }
        Command::Predict { model, input, threshold, out } => {
            cmd_predict(&model, &input, threshold, &out)
        }
        Command::Prompts { corpus, template, out } => cmd_prompts(&corpus, &template, &out),
        Command::Parse { generations, vocab_from, strict, out, summary } => {
            cmd_parse(&generations, &vocab_from, strict, &out, &summary)
        }
        Command::Evaluate { gold, pred, freq_buckets, length_buckets, report } => {
            cmd_evaluate(&gold, &pred, freq_buckets, length_buckets.as_deref(), &report)
        }
    }
}

fn cmd_stats(
    corpus_path: Option<&Path>,
    fixture_args: Option<&[u64]>,
    out: Option<&Path>,
) -> Result<()> {
    if let Some(args) = fixture_args {
        let [n, l, seed] = args else {
            return Err(Error::Usage("--make-fixture expects N L SEED".into()));
        };
        let out = out.ok_or_else(|| Error::Usage("--make-fixture requires --out".into()))?;
        let content = make_fixture(*n as usize, *l as usize, *seed);
        write_text(out, &content)?;
        println!("wrote fixture with {n} documents and {l} labels to {}", out.display());
        return Ok(());
    }
    let corpus_path =
        corpus_path.ok_or_else(|| Error::Usage("stats requires --corpus or --make-fixture".into()))?;
    let corpus = ingest_corpus(corpus_path, false)?;
    println!("documents: {}", corpus.len());
    println!("labels: {}", corpus.vocabulary.len());
    let mut by_count: Vec<LabelId> = (0..corpus.vocabulary.len()).collect();
    by_count.sort_by(|&a, &b| {
        corpus
            .vocabulary
            .train_count(b)
            .cmp(&corpus.vocabulary.train_count(a))
            .then_with(|| corpus.vocabulary.label(a).cmp(corpus.vocabulary.label(b)))
    });
    println!("frequency table:");
    for id in by_count {
        println!("  {}\t{}", corpus.vocabulary.label(id), corpus.vocabulary.train_count(id));
    }
    let buckets = frequency_buckets(&corpus.vocabulary)?;
    for (name, set) in
        [("high", &buckets.high), ("medium", &buckets.medium), ("low", &buckets.low)]
    {
        let names: Vec<&str> = set.iter().map(|&l| corpus.vocabulary.label(l)).collect();
        println!("{name} bucket: {}", names.join(", "));
    }
    Ok(())
}

fn cmd_split(
    corpus_path: &Path,
    train_out: &Path,
    test_out: &Path,
    fraction: f64,
    seed: u64,
) -> Result<()> {
    let corpus = ingest_corpus(corpus_path, false)?;
    let (train, test) = corpus::split(&corpus, fraction, seed)?;
    write_text(train_out, &corpus_to_jsonl(&train))?;
    write_text(test_out, &corpus_to_jsonl(&test))?;
    println!("train: {} docs, test: {} docs", train.len(), test.len());
    Ok(())
}

/// A fitted baseline able to score any document's labels.
enum FittedBaseline {
    ClassTfidf { tfidf: TfidfModel, model: baselines::ClassTfidfModel },
    DocTfidf { tfidf: TfidfModel, train: Corpus, vectors: Vec<SparseVector>, k: usize },
    Bm25 { queries: BTreeMap<LabelId, Vec<String>> },
}

impl FittedBaseline {
    /// Score every document of `docs` (a corpus of texts to predict on).
    fn score_corpus(
        &self,
        docs: &Corpus,
        vocab: &LabelVocabulary,
    ) -> Result<BTreeMap<String, ScoredLabels>> {
        let mut scored = BTreeMap::new();
        match self {
            FittedBaseline::ClassTfidf { tfidf, model } => {
                for doc in &docs.documents {
                    let v = transform(tfidf, &tokenize(&doc.text));
                    scored.insert(doc.id.clone(), classtfidf_score(model, &v, vocab));
                }
            }
            FittedBaseline::DocTfidf { tfidf, train, vectors, k } => {
                for doc in &docs.documents {
                    let v = transform(tfidf, &tokenize(&doc.text));
                    scored.insert(doc.id.clone(), doctfidf_score(train, vectors, &v, *k, vocab)?);
                }
            }
            FittedBaseline::Bm25 { queries } => {
                let token_lists: Vec<Vec<String>> =
                    docs.documents.iter().map(|d| tokenize(&d.text)).collect();
                let index = InvertedIndex::build(&token_lists)?;
                for (idx, doc) in docs.documents.iter().enumerate() {
                    scored.insert(
                        doc.id.clone(),
                        baselines::bm25_label_scores(&index, queries, idx, vocab)?,
                    );
                }
            }
        }
        Ok(scored)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_baseline(
    method: &str,
    train_path: &Path,
    test_path: &Path,
    policy: Option<&str>,
    calibrate: Option<&Path>,
    grid: Option<&str>,
    k: usize,
    out: &Path,
) -> Result<()> {
    let train = ingest_corpus(train_path, false)?;
    let test = ingest_corpus(test_path, false)?;
    let token_lists: Vec<Vec<String>> =
        train.documents.iter().map(|d| tokenize(&d.text)).collect();
    let tfidf = fit_tfidf(&token_lists)?;
    let fitted = match method {
        "classtfidf" => {
            let model = classtfidf_fit(&train, &tfidf)?;
            FittedBaseline::ClassTfidf { tfidf, model }
        }
        "doctfidf" => {
            let vectors: Vec<SparseVector> =
                token_lists.iter().map(|t| transform(&tfidf, t)).collect();
            if k == 0 || k > train.len() {
                return Err(Error::Usage(format!("k must lie in 1..={}", train.len())));
            }
            FittedBaseline::DocTfidf { tfidf, train: train.clone(), vectors, k }
        }
        "bm25" => FittedBaseline::Bm25 { queries: build_label_queries(&train.vocabulary)? },
        other => {
            return Err(Error::Usage(format!(
                "unknown method {other:?}, expected classtfidf, doctfidf, or bm25"
            )))
        }
    };
    let vocab = &train.vocabulary;
    let chosen_policy = match (policy, calibrate, grid) {
        (Some(spec), None, None) => DecisionPolicy::parse(spec)?,
        (None, Some(validation_path), Some(grid_spec)) => {
            let validation = ingest_corpus(validation_path, false)?;
            let scored = fitted.score_corpus(&validation, vocab)?;
            // gold labels mapped into the training vocabulary; labels unseen
            // in training are appended with count 0 so they still count as fn
            let mut extended = vocab.clone();
            let mut gold: BTreeMap<String, BTreeSet<LabelId>> = BTreeMap::new();
            for doc in &validation.documents {
                let set = doc
                    .labels
                    .iter()
                    .map(|&l| extended.get_or_insert(validation.vocabulary.label(l)))
                    .collect();
                gold.insert(doc.id.clone(), set);
            }
            let grid_policies = baselines::parse_grid(grid_spec)?;
            let chosen = baselines::calibrate_policy(&scored, &gold, &grid_policies, &extended)?;
            eprintln!("calibrated policy: {chosen}");
            chosen
        }
        _ => {
            return Err(Error::Usage(
                "provide either --policy, or --calibrate together with --grid".into(),
            ))
        }
    };
    let scored = fitted.score_corpus(&test, vocab)?;
    let records: Vec<PredictionRecord> = test
        .documents
        .iter()
        .map(|doc| {
            let labels = scored[&doc.id].decide(&chosen_policy);
            PredictionRecord { id: doc.id.clone(), labels: label_names(&labels, vocab) }
        })
        .collect();
    write_predictions(out, &records)?;
    println!("wrote {} predictions to {}", records.len(), out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    train_path: &Path,
    out_model: &Path,
    weighting: &str,
    lr: f64,
    epochs: usize,
    batch: usize,
    l2: f64,
    seed: u64,
) -> Result<()> {
    let train = ingest_corpus(train_path, false)?;
    let token_lists: Vec<Vec<String>> =
        train.documents.iter().map(|d| tokenize(&d.text)).collect();
    let tfidf = fit_tfidf(&token_lists)?;
    let weighting: Weighting = weighting.parse()?;
    let config = TrainConfig {
        learning_rate: lr,
        epochs,
        batch_size: batch,
        l2,
        weighting,
        seed,
        ..TrainConfig::default()
    };
    let outcome = linear::train(&train, &tfidf, &config)?;
    linear::save_model(&outcome.model, &config, &tfidf, out_model)?;
    if let Some(last) = outcome.epoch_losses.last() {
        println!("final training loss: {last:.6}");
    }
    println!("wrote model to {}", out_model.display());
    Ok(())
}

fn cmd_predict(model_path: &Path, input: &Path, threshold: f64, out: &Path) -> Result<()> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Usage("threshold must lie in (0, 1)".into()));
    }
    let (model, _config, tfidf) = linear::load_model(model_path)?;
    let docs = ingest_corpus(input, false)?;
    let records: Vec<PredictionRecord> = docs
        .documents
        .iter()
        .map(|doc| {
            let v = transform(&tfidf, &tokenize(&doc.text));
            let labels = model.predict(&v, threshold);
            PredictionRecord {
                id: doc.id.clone(),
                labels: labels.iter().map(|&l| model.labels[l].clone()).collect(),
            }
        })
        .collect();
    write_predictions(out, &records)?;
    println!("wrote {} predictions to {}", records.len(), out.display());
    Ok(())
}

fn cmd_prompts(corpus_path: &Path, template: &str, out: &Path) -> Result<()> {
    let corpus = ingest_corpus(corpus_path, false)?;
    let template = template_by_name(template)?;
    let written = export_finetune_dataset(&corpus, &template, out)?;
    println!("wrote {written} examples to {}", out.display());
    Ok(())
}

fn cmd_parse(
    generations: &Path,
    vocab_from: &Path,
    strict: bool,
    out: &Path,
    summary_path: &Path,
) -> Result<()> {
    let corpus = ingest_corpus(vocab_from, false)?;
    let opts = ParseOptions { strict, ..ParseOptions::default() };
    let (predictions, summary) = parse_generation_file(generations, &corpus.vocabulary, &opts)?;
    let records: Vec<PredictionRecord> = predictions
        .iter()
        .map(|p| PredictionRecord {
            id: p.doc_id.clone(),
            labels: label_names(&p.labels, &corpus.vocabulary),
        })
        .collect();
    write_predictions(out, &records)?;
    let mut summary_json = serde_json::to_string(&summary).expect("summary serialization");
    summary_json.push('\n');
    write_text(summary_path, &summary_json)?;
    println!(
        "parsed {} generations ({} unknown, {} duplicates)",
        summary.docs_parsed, summary.total_unknown, summary.total_duplicates
    );
    Ok(())
}

fn parse_boundaries(spec: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Usage(format!("bad length boundaries {spec:?}, expected B1,B2")));
    }
    let b1 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::Usage(format!("bad boundary {:?}", parts[0])))?;
    let b2 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::Usage(format!("bad boundary {:?}", parts[1])))?;
    Ok((b1, b2))
}

fn cmd_evaluate(
    gold_path: &Path,
    pred_path: &Path,
    freq_buckets: bool,
    length_bucket_spec: Option<&str>,
    report_path: &Path,
) -> Result<()> {
    let gold_corpus = ingest_corpus(gold_path, false)?;
    let records = read_predictions(pred_path)?;
    // predicted labels outside the gold vocabulary still count as fp for
    // micro; append them with count 0
    let mut vocab = gold_corpus.vocabulary.clone();
    let mut pred: BTreeMap<String, BTreeSet<LabelId>> = BTreeMap::new();
    for record in &records {
        let mut set = BTreeSet::new();
        for name in &record.labels {
            let canonical = corpus::canonicalize_label(name)?;
            set.insert(vocab.get_or_insert(&canonical));
        }
        if pred.insert(record.id.clone(), set).is_some() {
            return Err(Error::Data(format!("duplicate prediction for document {:?}", record.id)));
        }
    }
    let gold = gold_corpus.gold_map();
    let counts = metrics::confusion(&gold, &pred, &vocab)?;
    let freq = if freq_buckets {
        let buckets = frequency_buckets(&gold_corpus.vocabulary)?;
        Some(metrics::bucketed_macro_f1(&counts, &buckets))
    } else {
        None
    };
    let length = match length_bucket_spec {
        Some(spec) => {
            let boundaries = parse_boundaries(spec)?;
            let partition = length_buckets(&gold_corpus, boundaries)?;
            Some(metrics::length_bucketed_report(&gold, &pred, &partition, &vocab)?)
        }
        None => None,
    };
    let report = build_report(&counts, &vocab, freq, length)?;
    let mut json = serde_json::to_string_pretty(&report).expect("report serialization");
    json.push('\n');
    write_text(report_path, &json)?;
    println!("micro_f1: {:.4}", report.micro_f1);
    println!("macro_f1: {:.4}", report.macro_f1);
    Ok(())
}
