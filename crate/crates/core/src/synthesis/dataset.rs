use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{induce_controllers, sample_pseudo_summaries, serialize_controllers, ControllerError, ControllerSet, SynthConfig};
use crate::corpus::{Corpus, Review};
use crate::encoder::Encoder;
use crate::mil::{MilError, MilModel};

/// Value of the `format` field on the first line of a dataset file.
pub const DATASET_FORMAT: &str = "acesum-synthetic";

/// Entities processed per parallel batch before their records are written.
const BATCH: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("model: {0}")]
    Model(#[from] MilError),
    #[error("controllers: {0}")]
    Controllers(#[from] ControllerError),
    #[error("invalid config: {0}")]
    Config(String),
}

/// One pseudo-summary with its inputs and controllers.
#[derive(Debug, Clone)]
pub struct SyntheticExample<'a> {
    pub entity_id: String,
    pub pseudo_summary: &'a Review,
    pub input_reviews: Vec<&'a Review>,
    pub controllers: ControllerSet,
}

/// One line of the dataset file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub entity_id: String,
    pub summary_review_id: String,
    pub summary_text: String,
    pub controller_string: String,
    pub input_review_ids: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub per_entity: BTreeMap<String, usize>,
    pub total: usize,
}

#[derive(Serialize)]
struct Header<'a> {
    format: &'a str,
    version: u32,
    domain: &'a str,
    aspects: Vec<&'a str>,
}

/// Examples for one entity.
pub fn synthesize_entity<'a>(
    entity_id: &str,
    reviews: &'a [Review],
    model: &MilModel,
    encoder: &dyn Encoder,
    config: &SynthConfig,
) -> Result<Vec<SyntheticExample<'a>>, MilError> {
    sample_pseudo_summaries(reviews, model, encoder, config)?
        .into_iter()
        .map(|ps| {
            let controllers = induce_controllers(&ps, model, encoder, config)?;
            Ok(SyntheticExample {
                entity_id: entity_id.to_string(),
                pseudo_summary: ps.summary,
                input_reviews: ps.inputs,
                controllers,
            })
        })
        .collect()
}

fn to_record(ex: &SyntheticExample<'_>, aspect_count: usize) -> Result<DatasetRecord, ControllerError> {
    Ok(DatasetRecord {
        entity_id: ex.entity_id.clone(),
        summary_review_id: ex.pseudo_summary.review_id.clone(),
        summary_text: ex.pseudo_summary.text.clone(),
        controller_string: serialize_controllers(&ex.controllers, aspect_count)?,
        input_review_ids: ex.input_reviews.iter().map(|r| r.review_id.clone()).collect(),
    })
}

/// Writes a header line and then one JSON record per example, entities in
/// corpus order. Entities are processed in parallel batches; only this
/// thread writes.
pub fn write_dataset<W: Write>(
    corpus: &Corpus,
    model: &MilModel,
    encoder: &dyn Encoder,
    config: &SynthConfig,
    out: &mut W,
) -> Result<DatasetStats, DatasetError> {
    config.validate().map_err(DatasetError::Config)?;
    let aspect_count = corpus.aspect_count();
    if model.aspect_count() != aspect_count {
        return Err(MilError::Shape(format!(
            "model has {} aspects, corpus has {aspect_count}",
            model.aspect_count()
        ))
        .into());
    }
    let header = Header {
        format: DATASET_FORMAT,
        version: 1,
        domain: &corpus.domain,
        aspects: corpus.aspects.iter().map(|a| a.name.as_str()).collect(),
    };
    writeln!(out, "{}", serde_json::to_string(&header).map_err(io::Error::from)?)?;

    let mut stats = DatasetStats::default();
    for batch in corpus.entities().chunks(BATCH) {
        let results: Vec<Result<Vec<DatasetRecord>, DatasetError>> = batch
            .par_iter()
            .map(|entity| {
                let examples = synthesize_entity(&entity.id, &entity.reviews, model, encoder, config)?;
                Ok(examples
                    .iter()
                    .map(|ex| to_record(ex, aspect_count))
                    .collect::<Result<_, _>>()?)
            })
            .collect();
        for (entity, records) in batch.iter().zip(results) {
            let records = records?;
            for r in &records {
                writeln!(out, "{}", serde_json::to_string(r).map_err(io::Error::from)?)?;
            }
            stats.per_entity.insert(entity.id.clone(), records.len());
            stats.total += records.len();
        }
    }
    out.flush()?;
    Ok(stats)
}

/// [`write_dataset`] into a file.
pub fn build_dataset(
    corpus: &Corpus,
    model: &MilModel,
    encoder: &dyn Encoder,
    config: &SynthConfig,
    out_path: &Path,
) -> Result<DatasetStats, DatasetError> {
    let mut out = BufWriter::new(File::create(out_path)?);
    write_dataset(corpus, model, encoder, config, &mut out)
}
