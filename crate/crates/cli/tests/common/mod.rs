#![allow(dead_code)]

use std::path::{Path, PathBuf};

use acesum::config::{AppConfig, Paths};
use acesum_core::mil::TrainConfig;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

/// Config over the hotel fixtures with outputs in `dir`.
pub fn hotel_config(dir: &Path) -> AppConfig {
    AppConfig {
        paths: Paths {
            corpus: Some(fixture("hotels/hotels.jsonl")),
            aspects: Some(fixture("aspects/hotels.jsonl")),
            embeddings: Some(fixture("hotels/embeddings.txt")),
            eval_set: Some(fixture("hotels/eval.jsonl")),
            model: Some(dir.join("model.txt")),
            dataset: Some(dir.join("dataset.jsonl")),
            labels: Some(dir.join("labels.jsonl")),
        },
        train: TrainConfig {
            learning_rate: 5e-3,
            steps: 300,
            warmup_steps: 30,
            heads: 4,
            log_every: 0,
            ..TrainConfig::default()
        },
        ..AppConfig::default()
    }
}
