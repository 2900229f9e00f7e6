use std::collections::BTreeMap;

use lexitag::baselines::{
    bm25_label_scores, build_label_queries, calibrate_policy, classtfidf_fit, classtfidf_score,
    doctfidf_score, DecisionPolicy, ScoredLabels,
};
use lexitag::corpus::split;
use lexitag::fixture::make_fixture_corpus;
use lexitag::metrics::{confusion, micro_f1};
use lexitag::text::{fit_tfidf, tokenize, transform, InvertedIndex, SparseVector};

fn main() {
    let corpus = make_fixture_corpus(600, 8, 42).unwrap();
    let (train, rest) = split(&corpus, 0.5, 1).unwrap();
    let (valid, test) = split(&rest, 0.5, 2).unwrap();
    let token_lists: Vec<Vec<String>> =
        train.documents.iter().map(|d| tokenize(&d.text)).collect();
    let tfidf = fit_tfidf(&token_lists).unwrap();
    let vectors: Vec<SparseVector> = token_lists.iter().map(|t| transform(&tfidf, t)).collect();
    let vocab = &train.vocabulary;
    let grid: Vec<DecisionPolicy> = vec![
        DecisionPolicy::Threshold(0.05),
        DecisionPolicy::Threshold(0.1),
        DecisionPolicy::Threshold(0.2),
        DecisionPolicy::Threshold(0.3),
        DecisionPolicy::Threshold(0.4),
        DecisionPolicy::Threshold(0.5),
        DecisionPolicy::Threshold(0.7),
        DecisionPolicy::TopK(1),
        DecisionPolicy::TopK(2),
    ];
    let bm25_grid: Vec<DecisionPolicy> = vec![
        DecisionPolicy::Threshold(0.5),
        DecisionPolicy::Threshold(1.0),
        DecisionPolicy::Threshold(2.0),
        DecisionPolicy::Threshold(3.0),
        DecisionPolicy::Threshold(5.0),
        DecisionPolicy::TopK(1),
        DecisionPolicy::TopK(2),
    ];
    let classtfidf = classtfidf_fit(&train, &tfidf).unwrap();
    let queries = build_label_queries(vocab).unwrap();

    for method in ["classtfidf", "doctfidf", "bm25"] {
        let score_corpus = |c: &lexitag::corpus::Corpus| -> BTreeMap<String, ScoredLabels> {
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
                        (d.id.clone(), doctfidf_score(&train, &vectors, &v, 5, vocab).unwrap())
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
        // remap gold sets into the train vocabulary's id space
        let remap = |c: &lexitag::corpus::Corpus| {
            let mut extended = vocab.clone();
            let gold: BTreeMap<_, _> = c
                .documents
                .iter()
                .map(|d| {
                    let set: std::collections::BTreeSet<_> = d
                        .labels
                        .iter()
                        .map(|&l| extended.get_or_insert(c.vocabulary.label(l)))
                        .collect();
                    (d.id.clone(), set)
                })
                .collect();
            (gold, extended)
        };
        let g = if method == "bm25" { &bm25_grid } else { &grid };
        let valid_scores = score_corpus(&valid);
        let (valid_gold, valid_vocab) = remap(&valid);
        let policy = calibrate_policy(&valid_scores, &valid_gold, g, &valid_vocab).unwrap();
        let test_scores = score_corpus(&test);
        let pred: BTreeMap<_, _> =
            test_scores.iter().map(|(id, s)| (id.clone(), s.decide(&policy))).collect();
        let (test_gold, test_vocab) = remap(&test);
        let counts = confusion(&test_gold, &pred, &test_vocab).unwrap();
        println!("{method}: policy {policy}, test micro-F1 {:.4}", micro_f1(&counts));
    }
}
