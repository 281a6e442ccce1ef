//! Controller-driven extractive summaries: sentences ranked against the
//! queried aspect codes are fed to LexRank, and a short summary is
//! assembled from the most salient ones.

mod baselines;
mod lexrank;

pub use baselines::{centroid_baseline, lexrank_baseline, seed_filter_baseline, seed_filter_summary};
pub use lexrank::{
    lexrank, lexrank_reprs, sentence_reprs, sentence_similarity, transition_matrix, LexRankConfig,
};

use std::collections::BTreeSet;
use std::fmt;

use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::corpus::Review;
use crate::encoder::{cosine, Encoder};
use crate::mil::{MilError, MilModel};
use crate::synthesis::{target_vector, InputPredictions, RankedSentence};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SummarizerError {
    #[error("query selects no aspect")]
    EmptyQuery,
    #[error("query has {found} indicators, model has {expected} aspects")]
    QueryWidth { expected: usize, found: usize },
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] MilError),
}

/// Aspect indicators; at least one is set. All set asks for a general
/// summary.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Query {
    indicators: Vec<bool>,
}

impl Query {
    pub fn new(indicators: Vec<bool>) -> Result<Self, SummarizerError> {
        if !indicators.iter().any(|&q| q) {
            return Err(SummarizerError::EmptyQuery);
        }
        Ok(Self { indicators })
    }

    pub fn general(aspect_count: usize) -> Result<Self, SummarizerError> {
        Self::new(vec![true; aspect_count])
    }

    /// Query for the given codes; duplicates and order do not matter.
    pub fn from_codes(aspect_count: usize, codes: impl IntoIterator<Item = usize>) -> Result<Self, SummarizerError> {
        let mut indicators = vec![false; aspect_count];
        for c in codes {
            match indicators.get_mut(c) {
                Some(q) => *q = true,
                None => return Err(SummarizerError::QueryWidth { expected: aspect_count, found: c + 1 }),
            }
        }
        Self::new(indicators)
    }

    pub fn indicators(&self) -> &[bool] {
        &self.indicators
    }

    pub fn codes(&self) -> BTreeSet<usize> {
        self.indicators.iter().enumerate().filter(|(_, &q)| q).map(|(a, _)| a).collect()
    }
}

/// Bitmask such as `101`, aspect 0 first.
impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &q in &self.indicators {
            f.write_str(if q { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SummarizerConfig {
    /// Token cap on the ranked pool handed to LexRank.
    pub pool_token_budget: usize,
    /// Candidates more similar than this to a chosen sentence are skipped.
    pub redundancy_threshold: f64,
    pub lexrank: LexRankConfig,
}

impl Default for SummarizerConfig {
    fn default() -> Self {
        Self { pool_token_budget: 500, redundancy_threshold: 0.8, lexrank: LexRankConfig::default() }
    }
}

impl SummarizerConfig {
    pub fn validate(&self) -> Result<(), SummarizerError> {
        if self.pool_token_budget == 0 {
            return Err(SummarizerError::Config("pool_token_budget must be positive".into()));
        }
        if !self.redundancy_threshold.is_finite() {
            return Err(SummarizerError::Config("redundancy_threshold must be finite".into()));
        }
        self.lexrank.validate().map_err(SummarizerError::Config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummarySentence {
    pub text: String,
    pub review_id: String,
    pub sentence_index: usize,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub sentences: Vec<SummarySentence>,
    pub token_count: usize,
}

impl Summary {
    pub fn text(&self) -> String {
        self.sentences.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" ")
    }
}

/// Sentences of `entity_reviews` ranked against the query's codes, cut to
/// the pool token budget.
pub fn select_pool<'a>(
    entity_reviews: &'a [Review],
    query: &Query,
    model: &MilModel,
    encoder: &dyn Encoder,
    config: &SummarizerConfig,
) -> Result<Vec<RankedSentence<'a>>, SummarizerError> {
    let m = model.aspect_count();
    if query.indicators().len() != m {
        return Err(SummarizerError::QueryWidth { expected: m, found: query.indicators().len() });
    }
    let inputs: Vec<&Review> = entity_reviews.iter().collect();
    let target = target_vector(&query.codes(), m);
    Ok(InputPredictions::compute(&inputs, model, encoder)?.rank_sentences(&target, config.pool_token_budget))
}

/// Greedy assembly: descending salience, skipping near-duplicates of chosen
/// sentences and stopping at the first sentence that would overflow the
/// token budget. Output follows document order.
pub fn extract_summary(
    pool: &[RankedSentence<'_>],
    scores: ArrayView1<'_, f64>,
    reprs: ArrayView2<'_, f64>,
    config: &SummarizerConfig,
) -> Summary {
    assert_eq!(pool.len(), scores.len(), "pool and scores must align");
    assert_eq!(pool.len(), reprs.nrows(), "pool and representations must align");
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

    let mut chosen: Vec<usize> = Vec::new();
    let mut token_count = 0;
    for i in order {
        if chosen.iter().any(|&j| cosine(reprs.row(i), reprs.row(j)) > config.redundancy_threshold) {
            continue;
        }
        let len = pool[i].sentence.tokens.len();
        if token_count + len > config.lexrank.summary_token_budget {
            break;
        }
        token_count += len;
        chosen.push(i);
    }
    chosen.sort_by_key(|&i| (pool[i].review_pos, pool[i].sentence.index));
    Summary {
        sentences: chosen
            .into_iter()
            .map(|i| SummarySentence {
                text: pool[i].sentence.raw.clone(),
                review_id: pool[i].review.review_id.clone(),
                sentence_index: pool[i].sentence.index,
                score: scores[i],
            })
            .collect(),
        token_count,
    }
}

/// Pool selection, LexRank and greedy extraction in sequence.
pub fn summarize(
    entity_reviews: &[Review],
    query: &Query,
    model: &MilModel,
    encoder: &dyn Encoder,
    config: &SummarizerConfig,
) -> Result<Summary, SummarizerError> {
    config.validate()?;
    let pool = select_pool(entity_reviews, query, model, encoder, config)?;
    let tokens: Vec<&[String]> = pool.iter().map(|r| r.sentence.tokens.as_slice()).collect();
    let reprs = sentence_reprs(&tokens, encoder);
    let scores = lexrank_reprs(reprs.view(), &config.lexrank);
    Ok(extract_summary(&pool, scores.view(), reprs.view(), config))
}
