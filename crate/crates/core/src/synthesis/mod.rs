//! Synthetic training data: pseudo-summaries paired with the remaining
//! reviews of their entity and the aspect controllers induced for them.

mod controllers;
mod dataset;

pub use controllers::{parse_controllers, serialize_controllers, ControllerError, ControllerSet};
pub use dataset::{
    build_dataset, synthesize_entity, write_dataset, DatasetError, DatasetRecord, DatasetStats, SyntheticExample,
    DATASET_FORMAT,
};

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use ndarray::{Array1, ArrayView1};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Review, Sentence};
use crate::encoder::Encoder;
use crate::mil::{forward, positive_aspects, soft_margin_loss, AspectPredictions, MilError, MilModel};

/// What lower-level predictions are compared against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetMode {
    /// ±1 from the sign of the pseudo-summary's review prediction.
    #[default]
    Binary,
    /// The raw review prediction.
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub keyword_count: usize,
    /// Upper bound on the total tokens of controller sentences.
    pub token_budget: usize,
    pub max_examples_per_entity: usize,
    pub seed: u64,
    pub target: TargetMode,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            keyword_count: 10,
            token_budget: 500,
            max_examples_per_entity: 4,
            seed: 0,
            target: TargetMode::Binary,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.keyword_count == 0 || self.token_budget == 0 || self.max_examples_per_entity == 0 {
            return Err("keyword_count, token_budget and max_examples_per_entity must be positive".into());
        }
        Ok(())
    }
}

/// +1 for aspects in `codes`, -1 for the rest.
pub fn target_vector(codes: &BTreeSet<usize>, aspect_count: usize) -> Vec<f64> {
    (0..aspect_count).map(|a| if codes.contains(&a) { 1.0 } else { -1.0 }).collect()
}

/// Soft-margin loss of `pred` against the code set; lower is a better match.
pub fn aspect_match_score(pred: ArrayView1<'_, f64>, codes: &BTreeSet<usize>) -> f64 {
    soft_margin_loss(pred, &target_vector(codes, pred.len()))
}

/// A review drawn as pseudo-summary together with the entity's other
/// reviews.
#[derive(Debug, Clone)]
pub struct PseudoSummary<'a> {
    pub summary: &'a Review,
    pub inputs: Vec<&'a Review>,
    pub document: Array1<f64>,
}

impl PseudoSummary<'_> {
    pub fn codes(&self) -> BTreeSet<usize> {
        positive_aspects(self.document.view())
    }
}

/// FNV-1a, used to give every entity its own deterministic sampling order.
fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Draws reviews in a seeded order and keeps those predicted positive for
/// at least one aspect, up to `max_examples_per_entity`.
pub fn sample_pseudo_summaries<'a>(
    entity_reviews: &'a [Review],
    model: &MilModel,
    encoder: &dyn Encoder,
    config: &SynthConfig,
) -> Result<Vec<PseudoSummary<'a>>, MilError> {
    if entity_reviews.len() < 2 {
        return Ok(Vec::new());
    }
    let entity = &entity_reviews[0].entity_id;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ fnv1a(entity));
    let mut order: Vec<usize> = (0..entity_reviews.len()).collect();
    order.shuffle(&mut rng);

    let mut out = Vec::new();
    for i in order {
        if out.len() >= config.max_examples_per_entity {
            break;
        }
        let candidate = &entity_reviews[i];
        if candidate.token_count() == 0 {
            continue;
        }
        let document = forward(candidate, encoder, model)?.document;
        if positive_aspects(document.view()).is_empty() {
            continue;
        }
        let inputs = entity_reviews
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, r)| r)
            .collect();
        out.push(PseudoSummary { summary: candidate, inputs, document });
    }
    Ok(out)
}

/// A sentence of an input review with its match score.
#[derive(Debug, Clone, Copy)]
pub struct RankedSentence<'a> {
    pub review: &'a Review,
    /// Position of the review in the input list.
    pub review_pos: usize,
    pub sentence: &'a Sentence,
    pub score: f64,
}

/// Model predictions for every input review with at least one token.
pub struct InputPredictions<'a> {
    reviews: Vec<(usize, &'a Review, AspectPredictions)>,
}

impl<'a> InputPredictions<'a> {
    pub fn compute(inputs: &[&'a Review], model: &MilModel, encoder: &dyn Encoder) -> Result<Self, MilError> {
        let reviews = inputs
            .iter()
            .enumerate()
            .filter(|(_, r)| r.token_count() > 0)
            .map(|(pos, r)| Ok((pos, *r, forward(r, encoder, model)?)))
            .collect::<Result<_, MilError>>()?;
        Ok(Self { reviews })
    }

    /// All sentences by ascending score against `target`, ties broken by
    /// review position then sentence index, cut before the first sentence
    /// that would push the running token total past `token_budget`.
    pub fn rank_sentences(&self, target: &[f64], token_budget: usize) -> Vec<RankedSentence<'a>> {
        let mut ranked: Vec<RankedSentence<'a>> = Vec::new();
        for (pos, review, preds) in &self.reviews {
            // Sentences without tokens have no prediction row.
            let scored = review.sentences.iter().filter(|s| !s.tokens.is_empty());
            for (sentence, row) in scored.zip(preds.sentences.rows()) {
                ranked.push(RankedSentence {
                    review,
                    review_pos: *pos,
                    sentence,
                    score: soft_margin_loss(row, target),
                });
            }
        }
        ranked.sort_by(by_score_then_position);
        let mut used = 0;
        let keep = ranked
            .iter()
            .take_while(|r| {
                used += r.sentence.tokens.len();
                used <= token_budget
            })
            .count();
        ranked.truncate(keep);
        ranked
    }

    /// The `count` token types with the lowest best-occurrence score;
    /// ties are broken lexicographically.
    pub fn extract_keywords(&self, target: &[f64], count: usize) -> Vec<String> {
        let mut best: BTreeMap<&str, f64> = BTreeMap::new();
        for (_, review, preds) in &self.reviews {
            for (token, row) in review.tokens().zip(preds.tokens.rows()) {
                let score = soft_margin_loss(row, target);
                best.entry(token)
                    .and_modify(|s| {
                        if score < *s {
                            *s = score
                        }
                    })
                    .or_insert(score);
            }
        }
        let mut scored: Vec<(&str, f64)> = best.into_iter().collect();
        scored.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
        scored.into_iter().take(count).map(|(t, _)| t.to_string()).collect()
    }
}

/// Ranks the sentences of `inputs` by how well their sentence-level
/// predictions match `target`.
pub fn rank_sentences<'a>(
    inputs: &[&'a Review],
    target: &[f64],
    model: &MilModel,
    encoder: &dyn Encoder,
    token_budget: usize,
) -> Result<Vec<RankedSentence<'a>>, MilError> {
    Ok(InputPredictions::compute(inputs, model, encoder)?.rank_sentences(target, token_budget))
}

/// Aspect keywords of `inputs` with respect to `target`.
pub fn extract_keywords(
    inputs: &[&Review],
    target: &[f64],
    model: &MilModel,
    encoder: &dyn Encoder,
    count: usize,
) -> Result<Vec<String>, MilError> {
    Ok(InputPredictions::compute(inputs, model, encoder)?.extract_keywords(target, count))
}

/// Controllers for one pseudo-summary.
pub fn induce_controllers(
    example: &PseudoSummary<'_>,
    model: &MilModel,
    encoder: &dyn Encoder,
    config: &SynthConfig,
) -> Result<ControllerSet, MilError> {
    let codes = example.codes();
    let target = match config.target {
        TargetMode::Binary => target_vector(&codes, example.document.len()),
        TargetMode::Continuous => example.document.to_vec(),
    };
    let preds = InputPredictions::compute(&example.inputs, model, encoder)?;
    let sentences = preds
        .rank_sentences(&target, config.token_budget)
        .into_iter()
        .map(|r| r.sentence.raw.clone())
        // A literal marker inside review text cannot be serialized.
        .filter(|s| controllers::valid_sentence(s))
        .collect();
    Ok(ControllerSet {
        codes,
        keywords: preds.extract_keywords(&target, config.keyword_count),
        sentences,
    })
}

fn by_score_then_position(a: &RankedSentence<'_>, b: &RankedSentence<'_>) -> Ordering {
    a.score
        .total_cmp(&b.score)
        .then(a.review_pos.cmp(&b.review_pos))
        .then(a.sentence.index.cmp(&b.sentence.index))
}
