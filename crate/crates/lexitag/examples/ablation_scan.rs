use std::collections::BTreeMap;

use lexitag::corpus::split;
use lexitag::fixture::make_fixture_corpus;
use lexitag::linear::{train, TrainConfig, Weighting};
use lexitag::metrics::{confusion, macro_f1, micro_f1};
use lexitag::text::{fit_tfidf, tokenize, transform};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let epochs: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(50);
    let corpus = make_fixture_corpus(1000, 10, 42).unwrap();
    let mut wins = 0;
    let mut sum_delta = 0.0;
    for seed in 0..10u64 {
        let (train_split, test_split) = split(&corpus, 0.8, seed).unwrap();
        let token_lists: Vec<Vec<String>> =
            train_split.documents.iter().map(|d| tokenize(&d.text)).collect();
        let tfidf = fit_tfidf(&token_lists).unwrap();
        let mut scores = BTreeMap::new();
        for weighting in [Weighting::None, Weighting::InverseFrequency] {
            let config = TrainConfig { weighting, epochs, seed, ..TrainConfig::default() };
            let outcome = train(&train_split, &tfidf, &config).unwrap();
            let gold = test_split.gold_map();
            let mut pred = BTreeMap::new();
            for doc in &test_split.documents {
                let v = transform(&tfidf, &tokenize(&doc.text));
                // map prediction ids (train vocab) into test vocab space: identical prefix
                pred.insert(doc.id.clone(), outcome.model.predict(&v, 0.5));
            }
            let counts = confusion(&gold, &pred, &test_split.vocabulary).unwrap();
            let macro_set = counts.default_macro_set();
            let mf1 = macro_f1(&counts, &macro_set).unwrap();
            let mif1 = micro_f1(&counts);
            scores.insert(format!("{weighting:?}"), (mif1, mf1));
        }
        let none = scores["None"];
        let inv = scores["InverseFrequency"];
        let delta = inv.1 - none.1;
        sum_delta += delta;
        if inv.1 >= none.1 {
            wins += 1;
        }
        println!(
            "seed {seed}: unweighted micro {:.4} macro {:.4} | weighted micro {:.4} macro {:.4} | delta {:+.4}",
            none.0, none.1, inv.0, inv.1, delta
        );
    }
    println!("epochs {epochs}: wins {wins}/10, mean delta {:+.4}", sum_delta / 10.0);
}
