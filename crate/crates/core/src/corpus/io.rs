//! Line-delimited JSON readers for corpora, aspect inventories and eval sets.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{validate_aspects, AspectSpec, Corpus, CorpusError, EvalExample, Review};

/// One line of a corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub entity_id: String,
    pub review_id: String,
    pub text: String,
}

#[derive(Debug, Deserialize)]
struct AspectRecord {
    name: String,
    seeds: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct EvalReviewRecord {
    review_id: String,
    text: String,
}

#[derive(Debug, Deserialize)]
struct EvalRecord {
    entity_id: String,
    reviews: Vec<EvalReviewRecord>,
    #[serde(default)]
    general: Vec<String>,
    #[serde(default)]
    aspects: BTreeMap<String, Vec<String>>,
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Non-blank lines with their 1-based line numbers.
fn records(content: &str) -> impl Iterator<Item = (usize, &str)> {
    content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_line<T: for<'de> Deserialize<'de>>(line: usize, text: &str) -> Result<T, CorpusError> {
    serde_json::from_str(text).map_err(|e| CorpusError::Malformed { line, message: e.to_string() })
}

fn domain_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Parses corpus records. Fails on the first malformed line or on a
/// repeated review id. An empty file is an empty corpus.
pub fn parse_corpus(
    domain: &str,
    content: &str,
    aspects: Vec<AspectSpec>,
) -> Result<Corpus, CorpusError> {
    let mut seen = HashSet::new();
    let mut reviews = Vec::new();
    for (line, text) in records(content) {
        let rec: CorpusRecord = parse_line(line, text)?;
        if rec.text.split_whitespace().next().is_none() {
            return Err(CorpusError::EmptyText { line, review_id: rec.review_id });
        }
        if !seen.insert(rec.review_id.clone()) {
            return Err(CorpusError::DuplicateReview { line, review_id: rec.review_id });
        }
        reviews.push(Review::new(rec.entity_id, rec.review_id, rec.text));
    }
    Corpus::from_reviews(domain, reviews, aspects)
}

/// Loads a corpus file; the domain name is the file stem.
pub fn load_corpus(path: impl AsRef<Path>, aspects: Vec<AspectSpec>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    parse_corpus(&domain_of(path), &read(path)?, aspects)
}

/// Parses an aspect inventory, one `{"name", "seeds"}` record per line.
/// Ids are assigned in file order.
pub fn parse_aspects(content: &str) -> Result<Vec<AspectSpec>, CorpusError> {
    let mut out = Vec::new();
    for (line, text) in records(content) {
        let rec: AspectRecord = parse_line(line, text)?;
        let id = out.len();
        out.push(AspectSpec::new(id, rec.name, rec.seeds)?);
    }
    validate_aspects(&out)?;
    Ok(out)
}

pub fn load_aspects(path: impl AsRef<Path>) -> Result<Vec<AspectSpec>, CorpusError> {
    parse_aspects(&read(path.as_ref())?)
}

/// Loads an evaluation set; per-aspect references are keyed by aspect name
/// on disk and resolved to ids against `aspects`.
pub fn load_eval_set(
    path: impl AsRef<Path>,
    aspects: &[AspectSpec],
) -> Result<Vec<EvalExample>, CorpusError> {
    let content = read(path.as_ref())?;
    let mut out = Vec::new();
    for (line, text) in records(&content) {
        let rec: EvalRecord = parse_line(line, text)?;
        if rec.reviews.is_empty() {
            return Err(CorpusError::Malformed { line, message: "no input reviews".into() });
        }
        let input_reviews = rec
            .reviews
            .into_iter()
            .map(|r| Review::new(rec.entity_id.clone(), r.review_id, r.text))
            .collect();
        let mut aspect_refs = BTreeMap::new();
        for (name, refs) in rec.aspects {
            let spec = aspects.iter().find(|a| a.name == name).ok_or_else(|| {
                CorpusError::Malformed { line, message: format!("unknown aspect {name:?}") }
            })?;
            if refs.is_empty() {
                return Err(CorpusError::Malformed {
                    line,
                    message: format!("aspect {name:?} has no references"),
                });
            }
            aspect_refs.insert(spec.aspect_id, refs);
        }
        out.push(EvalExample {
            entity_id: rec.entity_id,
            input_reviews,
            general_refs: rec.general,
            aspect_refs,
        });
    }
    Ok(out)
}
