//! Workflow commands and the read-only summarization service.
//!
//! The CLI's `summarize` subcommand and the service's `/v1/summarize`
//! endpoint both go through [`Engine::summarize`] and [`render`], so their
//! output is byte-identical for the same entity and aspects.

pub mod commands;
pub mod config;
pub mod service;

use std::collections::BTreeSet;
use std::path::Path;

use acesum_core::corpus::{load_aspects, load_corpus, Corpus, CorpusError};
use acesum_core::encoder::{EmbeddingTable, Encoder, EncoderError};
use acesum_core::mil::{read_model, MilModel, ModelFormatError, TrainError};
use acesum_core::summarizer::{summarize, Query, SummarizerConfig, SummarizerError, SummarySentence};
use acesum_core::synthesis::DatasetError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::AppConfig;

/// Version of the service endpoints and their record schemas.
pub const API_VERSION: &str = "v1";

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error("model file: {0}")]
    ModelFormat(#[from] ModelFormatError),
    #[error("model does not fit the data: {0}")]
    ModelMismatch(String),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Summarizer(#[from] SummarizerError),
    #[error("unknown entity {id:?}; available: {available}")]
    UnknownEntity { id: String, available: String },
    #[error("unknown aspect {name:?}; available: {available}")]
    UnknownAspect { name: String, available: String },
}

/// Comma-separated list, cut after `limit` items.
fn name_list<'a>(names: impl Iterator<Item = &'a str>, limit: usize) -> String {
    let names: Vec<&str> = names.collect();
    let mut out = names.iter().take(limit).copied().collect::<Vec<_>>().join(", ");
    if names.len() > limit {
        out.push_str(&format!(", ... ({} total)", names.len()));
    }
    out
}

/// Request for one summary; no aspects asks for a general summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummarizeRequest {
    pub entity_id: String,
    #[serde(default)]
    pub aspects: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummarizeResponse {
    pub entity_id: String,
    /// Aspect indicators as a bitmask, aspect 0 first.
    pub query: String,
    pub codes: Vec<usize>,
    /// Names of `codes`, same order.
    pub aspects: Vec<String>,
    pub sentences: Vec<SummarySentence>,
    pub token_count: usize,
    pub model_version: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityInfo {
    pub entity_id: String,
    pub reviews: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectInfo {
    pub id: usize,
    pub name: String,
    pub seeds: Vec<String>,
}

/// Compact JSON of a response, the exact bytes both front ends emit.
pub fn render(response: &SummarizeResponse) -> String {
    serde_json::to_string(response).expect("plain data")
}

/// First 16 hex digits of the SHA-256 of the model file.
pub fn model_version(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Everything needed to answer summarize requests; immutable once built.
pub struct Engine {
    corpus: Corpus,
    table: EmbeddingTable,
    model: MilModel,
    model_version: String,
    config: SummarizerConfig,
}

impl Engine {
    pub fn new(
        corpus: Corpus,
        table: EmbeddingTable,
        model: MilModel,
        model_version: String,
        config: SummarizerConfig,
    ) -> Result<Self, AppError> {
        if model.dim() != table.dim() {
            return Err(AppError::ModelMismatch(format!(
                "model dimension {} but embeddings have {}",
                model.dim(),
                table.dim()
            )));
        }
        if model.aspect_count() != corpus.aspect_count() {
            return Err(AppError::ModelMismatch(format!(
                "model has {} aspects but {} are configured",
                model.aspect_count(),
                corpus.aspect_count()
            )));
        }
        config.validate()?;
        Ok(Self { corpus, table, model, model_version, config })
    }

    /// Loads corpus, aspects, embeddings and model named in `config`.
    pub fn load(config: &AppConfig) -> Result<Self, AppError> {
        let (corpus, table) = commands::load_inputs(config)?;
        let model_path = config::input_path(&config.paths.model, "model")?;
        let (model, version) = load_model(model_path)?;
        Self::new(corpus, table, model, version, config.summarizer.clone())
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn model_version(&self) -> &str {
        &self.model_version
    }

    pub fn entities(&self) -> Vec<EntityInfo> {
        self.corpus
            .entities()
            .iter()
            .map(|e| EntityInfo { entity_id: e.id.clone(), reviews: e.reviews.len() })
            .collect()
    }

    pub fn aspects(&self) -> Vec<AspectInfo> {
        self.corpus
            .aspects
            .iter()
            .map(|a| AspectInfo { id: a.aspect_id, name: a.name.clone(), seeds: a.seeds.iter().cloned().collect() })
            .collect()
    }

    /// Resolves aspect names to codes; an empty list means every aspect.
    pub fn resolve(&self, names: &[String]) -> Result<BTreeSet<usize>, AppError> {
        let m = self.corpus.aspect_count();
        if names.is_empty() {
            return Ok((0..m).collect());
        }
        names
            .iter()
            .map(|n| {
                self.corpus.aspect_by_name(n).map(|a| a.aspect_id).ok_or_else(|| AppError::UnknownAspect {
                    name: n.clone(),
                    available: name_list(self.corpus.aspects.iter().map(|a| a.name.as_str()), usize::MAX),
                })
            })
            .collect()
    }

    pub fn summarize(&self, request: &SummarizeRequest) -> Result<SummarizeResponse, AppError> {
        let entity = self.corpus.entity(&request.entity_id).ok_or_else(|| AppError::UnknownEntity {
            id: request.entity_id.clone(),
            available: name_list(self.corpus.entities().iter().map(|e| e.id.as_str()), 20),
        })?;
        let codes = self.resolve(&request.aspects)?;
        let query = Query::from_codes(self.corpus.aspect_count(), codes.iter().copied())?;
        let summary = summarize(&entity.reviews, &query, &self.model, &self.table, &self.config)?;
        Ok(SummarizeResponse {
            entity_id: entity.id.clone(),
            query: query.to_string(),
            aspects: codes.iter().map(|&c| self.corpus.aspects[c].name.clone()).collect(),
            codes: codes.into_iter().collect(),
            sentences: summary.sentences,
            token_count: summary.token_count,
            model_version: self.model_version.clone(),
        })
    }
}

/// Reads a model file and its version hash.
pub fn load_model(path: &Path) -> Result<(MilModel, String), AppError> {
    let bytes = std::fs::read(path).map_err(|e| AppError::Io(path.display().to_string(), e))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| AppError::Config(format!("model file {} is not UTF-8", path.display())))?;
    Ok((read_model(&text)?, model_version(&bytes)))
}

/// Loads the aspect inventory and corpus named in `config`.
pub fn load_corpus_from(config: &AppConfig) -> Result<Corpus, AppError> {
    let aspects = load_aspects(config::input_path(&config.paths.aspects, "aspects")?)?;
    Ok(load_corpus(config::input_path(&config.paths.corpus, "corpus")?, aspects)?)
}
