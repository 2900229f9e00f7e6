//! Acceptance suite: end-to-end checks against independent oracles,
//! closed forms, and directional properties. Each test prints one
//! PASS line on success (visible with --nocapture).

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lexitag::baselines::{
    bm25_label_scores, build_label_queries, calibrate_policy, classtfidf_fit, classtfidf_score,
    doctfidf_score, DecisionPolicy, ScoredLabels,
};
use lexitag::corpus::{
    frequency_buckets, length_buckets, split, Corpus, LabelId, LabelVocabulary,
};
use lexitag::fixture::make_fixture_corpus;
use lexitag::labelparse::{parse_generation, ParseOptions};
use lexitag::linear::{
    full_loss, loss_gradient, train, LabelWeights, LinearModel, TrainConfig, Weighting,
};
use lexitag::metrics::{self, confusion, macro_f1, micro_f1};
use lexitag::prompting::label_sequence;
use lexitag::text::{
    bm25_score, fit_tfidf, tokenize, transform, InvertedIndex, SparseVector, BM25_B, BM25_K1,
};

type LabelSets = BTreeMap<String, BTreeSet<LabelId>>;

fn vocab_of(n: usize) -> LabelVocabulary {
    let mut vocab = LabelVocabulary::default();
    for l in 0..n {
        vocab.get_or_insert(&format!("label{l:02}"));
    }
    vocab
}

/// Brute-force per-(doc,label) enumeration oracle for micro and macro F1.
/// Written independently of the metrics module: it loops over every
/// (doc, label) pair and pools plain integer counts.
fn oracle_micro_macro(gold: &LabelSets, pred: &LabelSets, n_labels: usize) -> (f64, f64) {
    let mut tp = vec![0u64; n_labels];
    let mut fp = vec![0u64; n_labels];
    let mut fn_ = vec![0u64; n_labels];
    for (doc, gold_set) in gold {
        let empty = BTreeSet::new();
        let pred_set = pred.get(doc).unwrap_or(&empty);
        for label in 0..n_labels {
            let in_gold = gold_set.contains(&label);
            let in_pred = pred_set.contains(&label);
            match (in_gold, in_pred) {
                (true, true) => tp[label] += 1,
                (false, true) => fp[label] += 1,
                (true, false) => fn_[label] += 1,
                (false, false) => {}
            }
        }
    }
    let sum_tp: u64 = tp.iter().sum();
    let sum_fp: u64 = fp.iter().sum();
    let sum_fn: u64 = fn_.iter().sum();
    let micro_denom = 2 * sum_tp + sum_fp + sum_fn;
    let micro = if micro_denom == 0 { 0.0 } else { 2.0 * sum_tp as f64 / micro_denom as f64 };
    let mut macro_sum = 0.0;
    let mut macro_n = 0usize;
    for label in 0..n_labels {
        if tp[label] + fn_[label] == 0 {
            continue; // no gold support
        }
        let denom = 2 * tp[label] + fp[label] + fn_[label];
        macro_sum += if denom == 0 { 0.0 } else { 2.0 * tp[label] as f64 / denom as f64 };
        macro_n += 1;
    }
    let macro_ = if macro_n == 0 { 0.0 } else { macro_sum / macro_n as f64 };
    (micro, macro_)
}

fn random_instance(rng: &mut ChaCha8Rng, max_docs: usize, max_labels: usize) -> (LabelSets, LabelSets, usize) {
    let n_docs = rng.random_range(1..=max_docs);
    let n_labels = rng.random_range(1..=max_labels);
    let mut gold = BTreeMap::new();
    let mut pred = BTreeMap::new();
    for d in 0..n_docs {
        let id = format!("doc{d}");
        let gold_set: BTreeSet<LabelId> =
            (0..n_labels).filter(|_| rng.random_range(0.0..1.0) < 0.4).collect();
        let pred_set: BTreeSet<LabelId> =
            (0..n_labels).filter(|_| rng.random_range(0.0..1.0) < 0.4).collect();
        gold.insert(id.clone(), gold_set);
        pred.insert(id, pred_set);
    }
    (gold, pred, n_labels)
}

#[test]
fn criterion_01_metric_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..1000 {
        let (gold, pred, n_labels) = random_instance(&mut rng, 10, 8);
        let vocab = vocab_of(n_labels);
        let counts = confusion(&gold, &pred, &vocab).unwrap();
        let micro = micro_f1(&counts);
        let macro_set = counts.default_macro_set();
        let macro_ = if macro_set.is_empty() {
            0.0
        } else {
            macro_f1(&counts, &macro_set).unwrap()
        };
        let (oracle_micro, oracle_macro) = oracle_micro_macro(&gold, &pred, n_labels);
        assert!((micro - oracle_micro).abs() <= 1e-12, "micro {micro} vs {oracle_micro}");
        assert!((macro_ - oracle_macro).abs() <= 1e-12, "macro {macro_} vs {oracle_macro}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "oracle sweep took {elapsed:?}");
    println!("PASS criterion 1: 1000 randomized instances match the enumeration oracle ({elapsed:?})");
}

#[test]
fn criterion_02_hand_computed_confusion_case() {
    let vocab = {
        let mut v = LabelVocabulary::default();
        for name in ["a", "b", "c"] {
            v.get_or_insert(name);
        }
        v
    };
    let gold: LabelSets = [
        ("d1".to_string(), [0, 1].into_iter().collect()),
        ("d2".to_string(), [2].into_iter().collect()),
    ]
    .into_iter()
    .collect();
    let pred: LabelSets = [
        ("d1".to_string(), [0].into_iter().collect()),
        ("d2".to_string(), [1, 2].into_iter().collect()),
    ]
    .into_iter()
    .collect();
    let counts = confusion(&gold, &pred, &vocab).unwrap();
    let micro = micro_f1(&counts);
    let macro_ = macro_f1(&counts, &counts.default_macro_set()).unwrap();
    assert!((micro - 0.6667).abs() <= 1e-4, "micro {micro}");
    assert!((macro_ - 0.6667).abs() <= 1e-4, "macro {macro_}");
    println!("PASS criterion 2: hand-computed confusion case micro={micro:.4} macro={macro_:.4}");
}

#[test]
fn criterion_03_gradient_check() {
    let start = Instant::now();
    let eps = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n_docs = rng.random_range(1..=5);
        let n_labels = rng.random_range(1..=4);
        let n_terms = rng.random_range(2..=8);
        let mut model = LinearModel::zeros(
            (0..n_labels).map(|l| format!("l{l}")).collect(),
            (0..n_terms).map(|t| format!("t{t}")).collect(),
        );
        for row in &mut model.weights {
            for w in row.iter_mut() {
                *w = rng.random_range(-1.5..1.5);
            }
        }
        for b in &mut model.bias {
            *b = rng.random_range(-1.5..1.5);
        }
        let features: Vec<SparseVector> = (0..n_docs)
            .map(|_| {
                let indices: Vec<usize> =
                    (0..n_terms).filter(|_| rng.random_range(0.0..1.0) < 0.7).collect();
                let values = indices.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
                SparseVector { indices, values }
            })
            .collect();
        let targets: Vec<Vec<f64>> = (0..n_docs)
            .map(|_| (0..n_labels).map(|_| f64::from(rng.random_range(0..2))).collect())
            .collect();
        let weights = LabelWeights((0..n_labels).map(|_| rng.random_range(0.2..3.0)).collect());
        let l2 = 1e-4;
        let grads = loss_gradient(&features, &targets, &weights, &model, l2).unwrap();
        let mut check = |analytic: f64, perturb: &mut dyn FnMut(&mut LinearModel, f64)| {
            let mut plus = model.clone();
            perturb(&mut plus, eps);
            let mut minus = model.clone();
            perturb(&mut minus, -eps);
            let numeric = (full_loss(&features, &targets, &weights, &plus, l2).unwrap()
                - full_loss(&features, &targets, &weights, &minus, l2).unwrap())
                / (2.0 * eps);
            let scale = analytic.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max((analytic - numeric).abs() / scale);
        };
        for label in 0..n_labels {
            for term in 0..n_terms {
                check(grads.weights[label][term], &mut |m, d| m.weights[label][term] += d);
            }
            check(grads.bias[label], &mut |m, d| m.bias[label] += d);
        }
    }
    let elapsed = start.elapsed();
    assert!(worst < 1e-4, "max relative coordinate error {worst}");
    assert!(elapsed.as_secs_f64() < 30.0, "gradient sweep took {elapsed:?}");
    println!("PASS criterion 3: 100 gradient checks, max relative error {worst:.2e} ({elapsed:?})");
}

/// Remap a split corpus's gold sets into a reference vocabulary's id
/// space, appending unseen labels with count 0.
fn remap_gold(corpus: &Corpus, reference: &LabelVocabulary) -> (LabelSets, LabelVocabulary) {
    let mut extended = reference.clone();
    let gold = corpus
        .documents
        .iter()
        .map(|d| {
            let set: BTreeSet<LabelId> = d
                .labels
                .iter()
                .map(|&l| extended.get_or_insert(corpus.vocabulary.label(l)))
                .collect();
            (d.id.clone(), set)
        })
        .collect();
    (gold, extended)
}

#[test]
fn criterion_04_weighted_loss_ablation() {
    let start = Instant::now();
    let corpus = make_fixture_corpus(1000, 10, 42).unwrap();
    let mut wins = 0;
    let mut deltas = Vec::new();
    for seed in 0..10u64 {
        let (train_split, test_split) = split(&corpus, 0.8, seed).unwrap();
        let token_lists: Vec<Vec<String>> =
            train_split.documents.iter().map(|d| tokenize(&d.text)).collect();
        let tfidf = fit_tfidf(&token_lists).unwrap();
        let mut macro_scores = Vec::new();
        for weighting in [Weighting::None, Weighting::InverseFrequency] {
            let config = TrainConfig { weighting, epochs: 120, seed, ..TrainConfig::default() };
            let outcome = train(&train_split, &tfidf, &config).unwrap();
            let (gold, vocab) = remap_gold(&test_split, &train_split.vocabulary);
            let pred: LabelSets = test_split
                .documents
                .iter()
                .map(|d| {
                    let v = transform(&tfidf, &tokenize(&d.text));
                    (d.id.clone(), outcome.model.predict(&v, 0.5))
                })
                .collect();
            let counts = confusion(&gold, &pred, &vocab).unwrap();
            macro_scores.push(macro_f1(&counts, &counts.default_macro_set()).unwrap());
        }
        let delta = macro_scores[1] - macro_scores[0];
        if delta >= 0.0 {
            wins += 1;
        }
        deltas.push(delta);
    }
    let mean_delta: f64 = deltas.iter().sum::<f64>() / deltas.len() as f64;
    let elapsed = start.elapsed();
    assert!(wins >= 8, "weighted won only {wins}/10 seeds (deltas {deltas:?})");
    assert!(mean_delta > 0.0, "mean macro-F1 improvement {mean_delta}");
    assert!(elapsed.as_secs_f64() < 120.0, "ablation took {elapsed:?}");
    println!(
        "PASS criterion 4: weighted loss won {wins}/10 seeds, mean macro-F1 delta {mean_delta:+.4} ({elapsed:?})"
    );
}

#[test]
fn criterion_05_baseline_sanity() {
    let start = Instant::now();
    let corpus = make_fixture_corpus(600, 8, 42).unwrap();
    let (train_split, rest) = split(&corpus, 0.5, 1).unwrap();
    let (valid, test) = split(&rest, 0.5, 2).unwrap();
    let token_lists: Vec<Vec<String>> =
        train_split.documents.iter().map(|d| tokenize(&d.text)).collect();
    let tfidf = fit_tfidf(&token_lists).unwrap();
    let vectors: Vec<SparseVector> = token_lists.iter().map(|t| transform(&tfidf, t)).collect();
    let vocab = &train_split.vocabulary;
    let classtfidf = classtfidf_fit(&train_split, &tfidf).unwrap();
    let queries = build_label_queries(vocab).unwrap();
    let similarity_grid: Vec<DecisionPolicy> = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.7]
        .into_iter()
        .map(DecisionPolicy::Threshold)
        .chain([DecisionPolicy::TopK(1), DecisionPolicy::TopK(2)])
        .collect();
    let bm25_grid: Vec<DecisionPolicy> = [0.5, 1.0, 2.0, 3.0, 5.0]
        .into_iter()
        .map(DecisionPolicy::Threshold)
        .chain([DecisionPolicy::TopK(1), DecisionPolicy::TopK(2)])
        .collect();
    for method in ["classtfidf", "doctfidf", "bm25"] {
        let score_corpus = |c: &Corpus| -> BTreeMap<String, ScoredLabels> {
            match method {
                "classtfidf" => c
                    .documents
                    .iter()
                    .map(|d| {
                        let v = transform(&tfidf, &tokenize(&d.text));
                        (d.id.clone(), classtfidf_score(&classtfidf, &v, vocab))
                    })
                    .collect(),
                "doctfidf" => c
                    .documents
                    .iter()
                    .map(|d| {
                        let v = transform(&tfidf, &tokenize(&d.text));
                        (
                            d.id.clone(),
                            doctfidf_score(&train_split, &vectors, &v, 5, vocab).unwrap(),
                        )
                    })
                    .collect(),
                _ => {
                    let lists: Vec<Vec<String>> =
                        c.documents.iter().map(|d| tokenize(&d.text)).collect();
                    let index = InvertedIndex::build(&lists).unwrap();
                    c.documents
                        .iter()
                        .enumerate()
                        .map(|(i, d)| {
                            (d.id.clone(), bm25_label_scores(&index, &queries, i, vocab).unwrap())
                        })
                        .collect()
                }
            }
        };
        let grid = if method == "bm25" { &bm25_grid } else { &similarity_grid };
        let (valid_gold, valid_vocab) = remap_gold(&valid, vocab);
        let policy =
            calibrate_policy(&score_corpus(&valid), &valid_gold, grid, &valid_vocab).unwrap();
        let (test_gold, test_vocab) = remap_gold(&test, vocab);
        let pred: LabelSets = score_corpus(&test)
            .iter()
            .map(|(id, s)| (id.clone(), s.decide(&policy)))
            .collect();
        let counts = confusion(&test_gold, &pred, &test_vocab).unwrap();
        let micro = micro_f1(&counts);
        assert!(micro >= 0.95, "{method} reached only micro-F1 {micro:.4} with policy {policy}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "baseline sweep took {elapsed:?}");
    println!("PASS criterion 5: all three baselines reach micro-F1 >= 0.95 ({elapsed:?})");
}

/// Dense BM25 oracle: straightforward dense-array arithmetic, no inverted
/// index, no postings.
fn dense_bm25(docs: &[Vec<&str>], query: &[&str], doc: usize, k1: f64, b: f64) -> f64 {
    let n = docs.len() as f64;
    let avg_len = docs.iter().map(|d| d.len()).sum::<usize>() as f64 / n;
    let mut score = 0.0;
    for term in query {
        let df = docs.iter().filter(|d| d.contains(term)).count() as f64;
        if df == 0.0 {
            continue;
        }
        let tf = docs[doc].iter().filter(|t| *t == term).count() as f64;
        if tf == 0.0 {
            continue;
        }
        let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
        let len_norm = 1.0 - b + b * docs[doc].len() as f64 / avg_len;
        score += idf * tf * (k1 + 1.0) / (tf + k1 * len_norm);
    }
    score
}

#[test]
fn criterion_06_bm25_closed_form() {
    let single = InvertedIndex::build(&[vec!["law".to_string()]]).unwrap();
    let score = bm25_score(&single, &["law".to_string()], 0, BM25_K1, BM25_B).unwrap();
    assert!((score - (4.0f64 / 3.0).ln()).abs() <= 1e-6, "single-doc score {score}");

    let docs: Vec<Vec<&str>> = vec![
        vec!["tax", "law", "tax", "audit"],
        vec!["contract", "law", "breach"],
        vec!["tax", "court", "appeal", "ruling", "order"],
    ];
    let owned: Vec<Vec<String>> = docs
        .iter()
        .map(|d| d.iter().map(|s| s.to_string()).collect())
        .collect();
    let index = InvertedIndex::build(&owned).unwrap();
    let cases: [(&[&str], usize); 3] = [
        (&["tax", "law"], 0),
        (&["contract", "law"], 1),
        (&["tax", "appeal"], 2),
    ];
    for (query, doc) in cases {
        let expected = dense_bm25(&docs, query, doc, BM25_K1, BM25_B);
        let owned_query: Vec<String> = query.iter().map(|s| s.to_string()).collect();
        let got = bm25_score(&index, &owned_query, doc, BM25_K1, BM25_B).unwrap();
        assert!((got - expected).abs() <= 1e-9, "query {query:?} doc {doc}: {got} vs {expected}");
    }
    println!("PASS criterion 6: BM25 closed form and dense-oracle cases match");
}

#[test]
fn criterion_07_round_trip_law_and_echo_pipeline() {
    // 500 random label sets survive label_sequence -> parse_generation
    let vocab = {
        let mut v = LabelVocabulary::default();
        for l in 0..12 {
            v.get_or_insert(&format!("area {l:02}"));
        }
        v
    };
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let opts = ParseOptions::default();
    for _ in 0..500 {
        let set: BTreeSet<LabelId> =
            (0..vocab.len()).filter(|_| rng.random_range(0.0..1.0) < 0.35).collect();
        let rendered = label_sequence(&set, &vocab).unwrap();
        let parsed = parse_generation(&rendered, &vocab, &opts).unwrap();
        assert_eq!(parsed.labels, set, "rendered {rendered:?}");
        assert!(parsed.unknown.is_empty());
    }

    // full pipeline echo through the CLI: fixture -> split -> prompts ->
    // gold-echo generations -> parse -> evaluate, expecting perfect scores
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let run = |args: &[&str]| {
        let mut argv = vec!["lexitag".to_string()];
        argv.extend(args.iter().map(|s| s.to_string()));
        assert_eq!(lexitag::cli::run(&argv), 0, "command failed: {args:?}");
    };
    run(&["stats", "--make-fixture", "60", "5", "9", "--out", &path("corpus.jsonl")]);
    run(&[
        "split", "--corpus", &path("corpus.jsonl"), "--train-out", &path("train.jsonl"),
        "--test-out", &path("test.jsonl"), "--fraction", "0.7", "--seed", "3",
    ]);
    run(&["prompts", "--corpus", &path("test.jsonl"), "--template", "p1", "--out", &path("ft.jsonl")]);
    // echo the gold outputs back as generations
    let ft = std::fs::read_to_string(path("ft.jsonl")).unwrap();
    let mut generations = String::new();
    for line in ft.lines() {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        generations.push_str(
            &serde_json::json!({
                "id": record["id"],
                "generation": record["output"],
            })
            .to_string(),
        );
        generations.push('\n');
    }
    std::fs::write(path("generations.jsonl"), generations).unwrap();
    run(&[
        "parse", "--generations", &path("generations.jsonl"), "--vocab-from", &path("test.jsonl"),
        "--out", &path("pred.jsonl"), "--summary", &path("summary.json"),
    ]);
    run(&[
        "evaluate", "--gold", &path("test.jsonl"), "--pred", &path("pred.jsonl"),
        "--report", &path("report.json"),
    ]);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path("report.json")).unwrap()).unwrap();
    assert_eq!(report["micro_f1"], 1.0);
    assert_eq!(report["macro_f1"], 1.0);
    println!("PASS criterion 7: 500 round trips exact; echo pipeline scores micro=macro=1.0");
}

#[test]
fn criterion_08_bucket_reports_match_slice_oracle() {
    let corpus = make_fixture_corpus(120, 8, 11).unwrap();
    let vocab = corpus.vocabulary.clone();
    // randomized predictions: drop and hallucinate some labels
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let gold = corpus.gold_map();
    let pred: LabelSets = corpus
        .documents
        .iter()
        .map(|d| {
            let mut set: BTreeSet<LabelId> = d
                .labels
                .iter()
                .copied()
                .filter(|_| rng.random_range(0.0..1.0) < 0.8)
                .collect();
            if rng.random_range(0.0..1.0) < 0.3 {
                set.insert(rng.random_range(0..vocab.len()));
            }
            (d.id.clone(), set)
        })
        .collect();
    let counts = confusion(&gold, &pred, &vocab).unwrap();

    // frequency buckets vs restricted-macro recomputation
    let buckets = frequency_buckets(&vocab).unwrap();
    let report = metrics::bucketed_macro_f1(&counts, &buckets);
    let macro_set = counts.default_macro_set();
    for (name, labels) in
        [("high", &buckets.high), ("medium", &buckets.medium), ("low", &buckets.low)]
    {
        let restricted: BTreeSet<LabelId> = labels.intersection(&macro_set).copied().collect();
        if restricted.is_empty() {
            assert!(!report.contains_key(name));
            continue;
        }
        let mut sum = 0.0;
        for &l in &restricted {
            let denom = 2 * counts.tp[l] + counts.fp[l] + counts.fn_[l];
            sum += if denom == 0 { 0.0 } else { 2.0 * counts.tp[l] as f64 / denom as f64 };
        }
        let expected = sum / restricted.len() as f64;
        assert_eq!(report[name], expected, "bucket {name}");
    }

    // length buckets vs independent slice-wise oracle
    let partition = length_buckets(&corpus, (256, 512)).unwrap();
    let length_report =
        metrics::length_bucketed_report(&gold, &pred, &partition, &vocab).unwrap();
    for (bucket, doc_ids) in &partition {
        let slice_gold: LabelSets = gold
            .iter()
            .filter(|(id, _)| doc_ids.contains(*id))
            .map(|(id, s)| (id.clone(), s.clone()))
            .collect();
        let slice_pred: LabelSets = pred
            .iter()
            .filter(|(id, _)| doc_ids.contains(*id))
            .map(|(id, s)| (id.clone(), s.clone()))
            .collect();
        let (oracle_micro, oracle_macro) =
            oracle_micro_macro(&slice_gold, &slice_pred, vocab.len());
        let scores = &length_report[bucket];
        assert_eq!(scores.micro_f1, oracle_micro, "bucket {bucket} micro");
        if let Some(m) = scores.macro_f1 {
            assert_eq!(m, oracle_macro, "bucket {bucket} macro");
        }
        assert_eq!(scores.n_docs, slice_gold.len());
    }
    println!("PASS criterion 8: frequency and length bucket reports equal slice-wise oracle");
}

#[test]
fn criterion_09_cli_determinism() {
    let run_all = |dir: &std::path::Path| {
        let path = |name: &str| dir.join(name).to_str().unwrap().to_string();
        let run = |args: &[&str]| {
            let mut argv = vec!["lexitag".to_string()];
            argv.extend(args.iter().map(|s| s.to_string()));
            assert_eq!(lexitag::cli::run(&argv), 0, "command failed: {args:?}");
        };
        run(&["stats", "--make-fixture", "80", "6", "5", "--out", &path("corpus.jsonl")]);
        run(&[
            "split", "--corpus", &path("corpus.jsonl"), "--train-out", &path("train.jsonl"),
            "--test-out", &path("test.jsonl"), "--fraction", "0.75", "--seed", "7",
        ]);
        run(&[
            "baseline", "--method", "bm25", "--train", &path("train.jsonl"),
            "--test", &path("test.jsonl"), "--policy", "threshold:1.0",
            "--out", &path("bm25.jsonl"),
        ]);
        run(&[
            "baseline", "--method", "classtfidf", "--train", &path("train.jsonl"),
            "--test", &path("test.jsonl"), "--calibrate", &path("train.jsonl"),
            "--grid", "topk:1,topk:2,threshold:0.3", "--out", &path("centroid.jsonl"),
        ]);
        run(&[
            "train", "--train", &path("train.jsonl"), "--out-model", &path("model.json"),
            "--weighting", "inverse_frequency", "--epochs", "5", "--seed", "13",
        ]);
        run(&[
            "predict", "--model", &path("model.json"), "--input", &path("test.jsonl"),
            "--threshold", "0.5", "--out", &path("linear.jsonl"),
        ]);
        run(&["prompts", "--corpus", &path("train.jsonl"), "--template", "p2", "--out", &path("ft.jsonl")]);
        let ft = std::fs::read_to_string(path("ft.jsonl")).unwrap();
        let mut generations = String::new();
        for line in ft.lines() {
            let record: serde_json::Value = serde_json::from_str(line).unwrap();
            generations.push_str(
                &serde_json::json!({"id": record["id"], "generation": record["output"]}).to_string(),
            );
            generations.push('\n');
        }
        std::fs::write(path("generations.jsonl"), generations).unwrap();
        run(&[
            "parse", "--generations", &path("generations.jsonl"),
            "--vocab-from", &path("train.jsonl"), "--out", &path("parsed.jsonl"),
            "--summary", &path("summary.json"),
        ]);
        run(&[
            "evaluate", "--gold", &path("test.jsonl"), "--pred", &path("bm25.jsonl"),
            "--freq-buckets", "--length-buckets", "256,512", "--report", &path("report.json"),
        ]);
    };
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    run_all(dir_a.path());
    run_all(dir_b.path());
    let outputs = [
        "corpus.jsonl", "train.jsonl", "test.jsonl", "bm25.jsonl", "centroid.jsonl",
        "model.json", "linear.jsonl", "ft.jsonl", "parsed.jsonl", "summary.json", "report.json",
    ];
    for name in outputs {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "output {name} differs across runs");
    }
    println!("PASS criterion 9: all CLI outputs byte-identical across repeated runs");
}

#[test]
fn criterion_10_prompt_templates_byte_match() {
    let templates = lexitag::prompting::builtin_templates();
    assert_eq!(
        templates[0].instruction.as_bytes(),
        b"Identify all applicable legal categories for the following legal text:".as_slice()
    );
    assert_eq!(
        templates[1].instruction.as_bytes(),
        b"Categorize the following legal document with all relevant legal categories:".as_slice()
    );
    println!("PASS criterion 10: both prompt templates byte-match");
}
