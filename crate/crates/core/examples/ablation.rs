//! Pooling ablation on planted corpora.
//!
//! ```text
//! cargo run --release -p acesum-core --example ablation -- [seeds] [entities] [reviews]
//! ```

use acesum_core::eval::{make_planted_corpus, planted_train_config, run_ablation, PlantedSpec};
use acesum_core::mil::Pooling;

fn arg(i: usize, default: usize) -> usize {
    std::env::args().nth(i).and_then(|v| v.parse().ok()).unwrap_or(default)
}

fn main() {
    let (seeds, entities, reviews) = (arg(1, 5) as u64, arg(2, 20), arg(3, 10));
    let spec = PlantedSpec::default();
    let mut doc = [0.0; 4];
    let mut sent = [0.0; 4];
    for seed in 0..seeds {
        let planted = make_planted_corpus(seed, entities, reviews, &spec);
        let report = run_ablation(&planted, &planted_train_config(seed), &Pooling::ALL).expect("training");
        println!("seed {seed}\n{report}");
        for (i, r) in report.rows.iter().enumerate() {
            doc[i] += r.doc_f1 / seeds as f64;
            sent[i] += r.sent_f1 / seeds as f64;
        }
    }
    println!("mean over {seeds} seeds");
    for (i, p) in Pooling::ALL.iter().enumerate() {
        println!("{:<10} {:>8.2} {:>8.2}", p.name(), 100.0 * doc[i], 100.0 * sent[i]);
    }
}
