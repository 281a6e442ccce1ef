//! One function per subcommand. Each returns its result so tests and the
//! binary share the same code.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use acesum_core::corpus::{load_aspects, load_eval_set, silver_label, Corpus};
use acesum_core::encoder::EmbeddingTable;
use acesum_core::eval::{evaluate, make_planted_corpus, planted_train_config, run_ablation, AblationReport, EvalReport, PlantedSpec};
use acesum_core::mil::{train_corpus, write_model, Pooling};
use acesum_core::synthesis::{build_dataset, DatasetStats};
use serde::{Deserialize, Serialize};

use crate::config::{input_path, output_path};
use crate::{load_corpus_from, load_model, model_version, render, AppConfig, AppError, Engine, SummarizeRequest};

fn io_err(path: &std::path::Path) -> impl Fn(std::io::Error) -> AppError + '_ {
    move |e| AppError::Io(path.display().to_string(), e)
}

/// Corpus plus embedding table.
pub fn load_inputs(config: &AppConfig) -> Result<(Corpus, EmbeddingTable), AppError> {
    let corpus = load_corpus_from(config)?;
    let table = EmbeddingTable::load(input_path(&config.paths.embeddings, "embeddings")?)?;
    Ok((corpus, table))
}

/// One line of the labels file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub entity_id: String,
    pub review_id: String,
    pub label: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectRate {
    pub aspect: String,
    pub positive: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub reviews: usize,
    pub aspects: Vec<AspectRate>,
}

impl fmt::Display for LabelStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<20} {:>8} {:>8}", "Aspect", "Positive", "Rate")?;
        for a in &self.aspects {
            writeln!(f, "{:<20} {:>8} {:>7.1}%", a.aspect, a.positive, 100.0 * a.rate)?;
        }
        write!(f, "{} reviews", self.reviews)
    }
}

/// Writes silver labels for every review and returns per-aspect positive
/// rates.
pub fn cmd_label(config: &AppConfig) -> Result<LabelStats, AppError> {
    let aspects_path = input_path(&config.paths.aspects, "aspects")?;
    let aspects = load_aspects(aspects_path)?;
    let corpus = acesum_core::corpus::load_corpus(input_path(&config.paths.corpus, "corpus")?, aspects)?;
    let out_path = output_path(&config.paths.labels, "labels")?;
    let mut out = BufWriter::new(File::create(out_path).map_err(io_err(out_path))?);
    let mut positive = vec![0usize; corpus.aspect_count()];
    for review in corpus.reviews() {
        let label = silver_label(review, &corpus.aspects);
        for (p, &v) in positive.iter_mut().zip(&label) {
            *p += (v > 0.0) as usize;
        }
        let rec = LabelRecord { entity_id: review.entity_id.clone(), review_id: review.review_id.clone(), label };
        writeln!(out, "{}", serde_json::to_string(&rec).expect("plain data")).map_err(io_err(out_path))?;
    }
    out.flush().map_err(io_err(out_path))?;
    let n = corpus.review_count();
    Ok(LabelStats {
        reviews: n,
        aspects: corpus
            .aspects
            .iter()
            .zip(positive)
            .map(|(a, p)| AspectRate {
                aspect: a.name.clone(),
                positive: p,
                rate: if n == 0 { 0.0 } else { p as f64 / n as f64 },
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub model: PathBuf,
    pub model_version: String,
    pub steps: usize,
}

/// Trains on silver labels and writes the model file.
pub fn cmd_train(config: &AppConfig) -> Result<TrainOutcome, AppError> {
    config.validate()?;
    let (corpus, table) = load_inputs(config)?;
    let out_path = output_path(&config.paths.model, "model")?;
    let model = train_corpus(&corpus, &table, &config.train)?;
    let text = write_model(&model);
    std::fs::write(out_path, &text).map_err(io_err(out_path))?;
    Ok(TrainOutcome {
        model: out_path.to_path_buf(),
        model_version: model_version(text.as_bytes()),
        steps: config.train.steps,
    })
}

/// Writes the synthetic dataset.
pub fn cmd_build(config: &AppConfig) -> Result<DatasetStats, AppError> {
    config.validate()?;
    let (corpus, table) = load_inputs(config)?;
    let (model, _) = load_model(input_path(&config.paths.model, "model")?)?;
    let out_path = output_path(&config.paths.dataset, "dataset")?;
    Ok(build_dataset(&corpus, &model, &table, &config.synthesis, out_path)?)
}

/// One summary as a JSON line, identical to the service's response body.
pub fn cmd_summarize(config: &AppConfig, entity_id: &str, aspects: &[String]) -> Result<String, AppError> {
    let engine = Engine::load(config)?;
    let request = SummarizeRequest { entity_id: entity_id.to_string(), aspects: aspects.to_vec() };
    Ok(render(&engine.summarize(&request)?))
}

/// ROUGE of every system on the evaluation set.
pub fn cmd_eval(config: &AppConfig) -> Result<EvalReport, AppError> {
    config.validate()?;
    let aspects = load_aspects(input_path(&config.paths.aspects, "aspects")?)?;
    let examples = load_eval_set(input_path(&config.paths.eval_set, "eval_set")?, &aspects)?;
    let table = EmbeddingTable::load(input_path(&config.paths.embeddings, "embeddings")?)?;
    let (model, _) = load_model(input_path(&config.paths.model, "model")?)?;
    if model.aspect_count() != aspects.len() {
        return Err(AppError::ModelMismatch(format!(
            "model has {} aspects but {} are configured",
            model.aspect_count(),
            aspects.len()
        )));
    }
    Ok(evaluate(&examples, &model, &table, &aspects, &config.summarizer, config.eval.aggregation)?)
}

/// Pooling ablation on freshly generated planted corpora, one report per
/// seed.
pub fn cmd_ablate(seeds: u64, entities: usize, reviews: usize) -> Result<Vec<AblationReport>, AppError> {
    (0..seeds)
        .map(|seed| {
            let planted = make_planted_corpus(seed, entities, reviews, &PlantedSpec::default());
            Ok(run_ablation(&planted, &planted_train_config(seed), &Pooling::ALL)?)
        })
        .collect()
}
