//! Review corpora: loading, segmentation, aspect seed sets and silver labels.

mod io;
mod text;

pub use io::{load_aspects, load_corpus, load_eval_set, parse_aspects, parse_corpus, CorpusRecord};
pub use text::{split_sentences, tokenize, Sentence, ABBREVIATIONS};

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate review_id {review_id:?}")]
    DuplicateReview { line: usize, review_id: String },
    #[error("line {line}: review {review_id:?} has empty text")]
    EmptyText { line: usize, review_id: String },
    #[error("invalid aspect spec: {0}")]
    InvalidAspect(String),
    #[error("no aspects defined")]
    NoAspects,
}

/// One review with its deterministic segmentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub entity_id: String,
    pub review_id: String,
    pub text: String,
    pub sentences: Vec<Sentence>,
}

impl Review {
    pub fn new(
        entity_id: impl Into<String>,
        review_id: impl Into<String>,
        text: impl Into<String>,
    ) -> Self {
        let text = text.into();
        let sentences = split_sentences(&text);
        Self {
            entity_id: entity_id.into(),
            review_id: review_id.into(),
            text,
            sentences,
        }
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.sentences
            .iter()
            .flat_map(|s| s.tokens.iter().map(String::as_str))
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }
}

/// A named aspect and the seed words that signal it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectSpec {
    pub aspect_id: usize,
    pub name: String,
    pub seeds: BTreeSet<String>,
}

impl AspectSpec {
    /// Seeds are lowercased; an empty seed set is rejected.
    pub fn new<I, S>(aspect_id: usize, name: impl Into<String>, seeds: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let name = name.into();
        let seeds: BTreeSet<String> = seeds
            .into_iter()
            .map(|s| s.as_ref().trim().to_lowercase())
            .filter(|s| !s.is_empty())
            .collect();
        if name.trim().is_empty() {
            return Err(CorpusError::InvalidAspect("aspect with empty name".into()));
        }
        if seeds.is_empty() {
            return Err(CorpusError::InvalidAspect(format!("aspect {name:?} has no seeds")));
        }
        Ok(Self { aspect_id, name, seeds })
    }
}

/// Checks the invariants of an aspect list: ids dense from 0, names unique.
pub fn validate_aspects(aspects: &[AspectSpec]) -> Result<(), CorpusError> {
    if aspects.is_empty() {
        return Err(CorpusError::NoAspects);
    }
    let mut names = HashSet::new();
    for (i, a) in aspects.iter().enumerate() {
        if a.aspect_id != i {
            return Err(CorpusError::InvalidAspect(format!(
                "aspect {:?} has id {} at position {i}",
                a.name, a.aspect_id
            )));
        }
        if !names.insert(a.name.as_str()) {
            return Err(CorpusError::InvalidAspect(format!("duplicate aspect name {:?}", a.name)));
        }
    }
    Ok(())
}

/// All reviews of one entity, ordered by review id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    pub reviews: Vec<Review>,
}

/// Reviews grouped by entity plus the aspect inventory of the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub domain: String,
    entities: Vec<Entity>,
    pub aspects: Vec<AspectSpec>,
}

impl Corpus {
    /// Groups reviews by entity. Entities come out in lexicographic order of
    /// their id and reviews in lexicographic order of review id.
    pub fn from_reviews(
        domain: impl Into<String>,
        reviews: Vec<Review>,
        aspects: Vec<AspectSpec>,
    ) -> Result<Self, CorpusError> {
        validate_aspects(&aspects)?;
        let mut seen = HashSet::new();
        let mut grouped: BTreeMap<String, Vec<Review>> = BTreeMap::new();
        for (i, r) in reviews.into_iter().enumerate() {
            if !seen.insert(r.review_id.clone()) {
                return Err(CorpusError::DuplicateReview { line: i + 1, review_id: r.review_id });
            }
            grouped.entry(r.entity_id.clone()).or_default().push(r);
        }
        let entities = grouped
            .into_iter()
            .map(|(id, mut reviews)| {
                reviews.sort_by(|a, b| a.review_id.cmp(&b.review_id));
                Entity { id, reviews }
            })
            .collect();
        Ok(Self { domain: domain.into(), entities, aspects })
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities
            .binary_search_by(|e| e.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.entities[i])
    }

    /// Every review, entity by entity.
    pub fn reviews(&self) -> impl Iterator<Item = &Review> {
        self.entities.iter().flat_map(|e| e.reviews.iter())
    }

    pub fn review_count(&self) -> usize {
        self.entities.iter().map(|e| e.reviews.len()).sum()
    }

    pub fn aspect_count(&self) -> usize {
        self.aspects.len()
    }

    pub fn aspect_by_name(&self, name: &str) -> Option<&AspectSpec> {
        self.aspects.iter().find(|a| a.name == name)
    }
}

/// Document label in {+1, -1}^M derived from seed word occurrence.
pub type SilverLabel = Vec<f64>;

/// +1 for every aspect with at least one seed among the review's tokens,
/// -1 otherwise. Matching is exact equality of lowercase tokens.
pub fn silver_label(review: &Review, aspects: &[AspectSpec]) -> SilverLabel {
    let tokens: HashSet<&str> = review.tokens().collect();
    aspects
        .iter()
        .map(|a| {
            if a.seeds.iter().any(|s| tokens.contains(s.as_str())) {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

/// An evaluation instance: input reviews and human references.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalExample {
    pub entity_id: String,
    pub input_reviews: Vec<Review>,
    pub general_refs: Vec<String>,
    pub aspect_refs: BTreeMap<usize, Vec<String>>,
}
