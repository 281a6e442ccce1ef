mod common;

use std::collections::BTreeSet;

use acesum_core::corpus::{load_aspects, load_corpus, load_eval_set, Corpus};
use acesum_core::encoder::{EmbeddingTable, Encoder};
use acesum_core::eval::{
    aspect_f1, evaluate, make_planted_corpus, run_ablation, Aggregation, Confusion, PlantedCorpus, PlantedSpec, System,
};
use acesum_core::mil::{train_corpus, MilModel, Pooling, TrainConfig};
use acesum_core::summarizer::SummarizerConfig;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn oracle_counts(model: &MilModel, planted: &PlantedCorpus) -> ((usize, usize, usize), (usize, usize, usize)) {
    let mut doc = (0, 0, 0);
    let mut sent = (0, 0, 0);
    let count = |acc: &mut (usize, usize, usize), z: &[f64], gold: &BTreeSet<usize>| {
        for (a, &v) in z.iter().enumerate() {
            match (v > 0.0, gold.contains(&a)) {
                (true, true) => acc.0 += 1,
                (true, false) => acc.1 += 1,
                (false, true) => acc.2 += 1,
                _ => {}
            }
        }
    };
    for r in planted.corpus.reviews() {
        let sents: Vec<Vec<String>> = r.sentences.iter().map(|s| s.tokens.clone()).collect();
        let f = oracle_forward(model, &planted.table, &sents);
        count(&mut doc, &f.document, &planted.document_gold(&r.review_id));
        for (i, z) in f.sentences.iter().enumerate() {
            count(&mut sent, z, &planted.sentence_aspect(&r.review_id, i).into_iter().collect());
        }
    }
    (doc, sent)
}

#[test]
fn aspect_f1_matches_exhaustive_counts() {
    let planted = make_planted_corpus(1, 4, 5, &PlantedSpec::default());
    for seed in 0..3 {
        let model = MilModel::init(planted.spec.dim, 3, 3, Pooling::Mip, seed);
        let got = aspect_f1(&model, &planted, &planted.table).unwrap();
        let (doc, sent) = oracle_counts(&model, &planted);
        assert_eq!((got.doc.tp, got.doc.fp, got.doc.fn_), doc);
        assert_eq!((got.sent.tp, got.sent.fp, got.sent.fn_), sent);
        let f1 = |(tp, fp, fn_): (usize, usize, usize)| 2.0 * tp as f64 / (2 * tp + fp + fn_).max(1) as f64;
        assert!((got.doc_f1 - f1(doc)).abs() < 1e-15);
        assert!((got.sent_f1 - f1(sent)).abs() < 1e-15);
    }
}

#[test]
fn all_negative_predictor_scores_zero() {
    let planted = make_planted_corpus(2, 3, 4, &PlantedSpec::default());
    let mut model = MilModel::zeros(planted.spec.dim, 3, 1, Pooling::Mip);
    model.token_bias.fill(-4.0);
    let f = aspect_f1(&model, &planted, &planted.table).unwrap();
    assert_eq!((f.doc_f1, f.sent_f1), (0.0, 0.0));
}

#[test]
fn gold_against_itself_scores_one() {
    let planted = make_planted_corpus(2, 3, 4, &PlantedSpec::default());
    let mut c = Confusion::default();
    for r in planted.corpus.reviews() {
        let g = planted.document_gold(&r.review_id);
        c.add(&g, &g);
    }
    assert_eq!(c.f1(), 1.0);
}

#[test]
fn aspect_f1_ignores_review_order() {
    let planted = make_planted_corpus(3, 4, 5, &PlantedSpec::default());
    let model = MilModel::init(planted.spec.dim, 3, 2, Pooling::Mip, 5);
    let mut reviews: Vec<_> = planted.corpus.reviews().cloned().collect();
    reviews.shuffle(&mut ChaCha8Rng::seed_from_u64(0));
    let shuffled = PlantedCorpus {
        corpus: Corpus::from_reviews("planted", reviews, planted.corpus.aspects.clone()).unwrap(),
        ..planted.clone()
    };
    assert_eq!(
        aspect_f1(&model, &planted, &planted.table).unwrap(),
        aspect_f1(&model, &shuffled, &planted.table).unwrap()
    );
}

#[test]
fn ablation_rows_are_reproducible() {
    let planted = make_planted_corpus(4, 4, 5, &PlantedSpec::default());
    let config = TrainConfig { steps: 40, warmup_steps: 4, heads: 2, learning_rate: 5e-3, log_every: 0, ..Default::default() };
    let a = run_ablation(&planted, &config, &Pooling::ALL).unwrap();
    assert_eq!(a.rows.len(), 4);
    let b = run_ablation(&planted, &config, &Pooling::ALL).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_string().lines().count(), 5);
    assert_eq!(a.to_records().lines().count(), 4);
}

#[test]
fn report_on_hotel_fixture() {
    let aspects = load_aspects(fixture("aspects/hotels.jsonl")).unwrap();
    let corpus = load_corpus(fixture("hotels/hotels.jsonl"), aspects.clone()).unwrap();
    let table = EmbeddingTable::load(fixture("hotels/embeddings.txt")).unwrap();
    let examples = load_eval_set(fixture("hotels/eval.jsonl"), &aspects).unwrap();
    let config = TrainConfig { steps: 200, warmup_steps: 20, heads: 2, learning_rate: 5e-3, log_every: 0, ..Default::default() };
    let model = train_corpus(&corpus, &table, &config).unwrap();
    assert_eq!(model.dim(), table.dim());
    let report = evaluate(&examples, &model, &table, &aspects, &SummarizerConfig::default(), Aggregation::Mean).unwrap();
    let systems: BTreeSet<System> = report.rows.iter().map(|r| r.system).collect();
    assert_eq!(systems.len(), 4);
    assert!(report.rows.iter().all(|r| [r.r1, r.r2, r.rl].iter().all(|v| (0.0..=1.0).contains(v))));
    let general: Vec<_> = report.rows.iter().filter(|r| r.setting == "general").collect();
    assert_eq!(general.len(), 3);
    assert!(general.iter().all(|r| r.examples == 2));
    let again = evaluate(&examples, &model, &table, &aspects, &SummarizerConfig::default(), Aggregation::Mean).unwrap();
    assert_eq!(report.to_records(), again.to_records());
}
