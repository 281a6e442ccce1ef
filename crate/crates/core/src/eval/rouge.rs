//! ROUGE-1/2/L over pre-tokenized text.
//!
//! No stemming and no stopword removal; callers tokenize with
//! [`crate::corpus::tokenize`], which lowercases and strips punctuation.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RougeError {
    #[error("no reference summaries")]
    NoReferences,
}

/// Precision, recall and their harmonic mean.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_counts(overlap: usize, candidate: usize, reference: usize) -> Self {
        if candidate == 0 || reference == 0 {
            return Self::default();
        }
        let precision = overlap as f64 / candidate as f64;
        let recall = overlap as f64 / reference as f64;
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self { precision, recall, f1 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub r1: Prf,
    pub r2: Prf,
    pub rl: Prf,
}

impl RougeScore {
    pub fn compute<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> Self {
        Self {
            r1: rouge_n(candidate, reference, 1),
            r2: rouge_n(candidate, reference, 2),
            rl: rouge_l(candidate, reference),
        }
    }
}

/// How scores against several references are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Mean,
    /// Per metric, the reference with the highest F1.
    Max,
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
        }
    }
    counts
}

/// ROUGE-N with clipped n-gram counts.
pub fn rouge_n<S: AsRef<str>>(candidate: &[S], reference: &[S], n: usize) -> Prf {
    let cand = ngram_counts(candidate, n);
    let refs = ngram_counts(reference, n);
    let overlap = cand
        .iter()
        .map(|(g, &c)| c.min(refs.get(g).copied().unwrap_or(0)))
        .sum();
    Prf::from_counts(overlap, cand.values().sum(), refs.values().sum())
}

/// Length of the longest common subsequence, two-row dynamic program.
pub fn lcs_len<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge_l<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> Prf {
    Prf::from_counts(lcs_len(candidate, reference), candidate.len(), reference.len())
}

fn mean(scores: &[Prf]) -> Prf {
    let n = scores.len() as f64;
    Prf {
        precision: scores.iter().map(|s| s.precision).sum::<f64>() / n,
        recall: scores.iter().map(|s| s.recall).sum::<f64>() / n,
        f1: scores.iter().map(|s| s.f1).sum::<f64>() / n,
    }
}

fn best(scores: &[Prf]) -> Prf {
    scores
        .iter()
        .copied()
        .fold(None, |acc: Option<Prf>, s| match acc {
            Some(a) if a.f1 >= s.f1 => Some(a),
            _ => Some(s),
        })
        .unwrap_or_default()
}

/// Scores a candidate against every reference and aggregates per metric.
pub fn multi_ref_score<S: AsRef<str>>(
    candidate: &[S],
    references: &[Vec<S>],
    aggregation: Aggregation,
) -> Result<RougeScore, RougeError> {
    if references.is_empty() {
        return Err(RougeError::NoReferences);
    }
    let per_ref: Vec<RougeScore> = references.iter().map(|r| RougeScore::compute(candidate, r)).collect();
    let combine = match aggregation {
        Aggregation::Mean => mean,
        Aggregation::Max => best,
    };
    let pick = |f: fn(&RougeScore) -> Prf| combine(&per_ref.iter().map(f).collect::<Vec<_>>());
    Ok(RougeScore { r1: pick(|s| s.r1), r2: pick(|s| s.r2), rl: pick(|s| s.rl) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn identical_texts_score_one() {
        let a = t("the room was clean and quiet");
        let s = RougeScore::compute(&a, &a);
        for prf in [s.r1, s.r2, s.rl] {
            assert_eq!(prf, Prf { precision: 1.0, recall: 1.0, f1: 1.0 });
        }
    }

    #[test]
    fn disjoint_texts_score_zero() {
        let s = RougeScore::compute(&t("a b c"), &t("d e f"));
        assert_eq!(s, RougeScore::default());
    }

    #[test]
    fn empty_inputs_score_zero() {
        assert_eq!(rouge_n(&t(""), &t("a"), 1), Prf::default());
        assert_eq!(rouge_n(&t("a"), &t(""), 1), Prf::default());
        assert_eq!(rouge_l(&t(""), &t("a")), Prf::default());
        // A single token has no bigram.
        assert_eq!(rouge_n(&t("a"), &t("a"), 2), Prf::default());
    }

    #[test]
    fn clipping() {
        // "the" appears 3 times in the candidate but only once in the reference.
        let p = rouge_n(&t("the the the"), &t("the cat"), 1);
        assert!((p.precision - 1.0 / 3.0).abs() < 1e-15);
        assert!((p.recall - 0.5).abs() < 1e-15);
    }

    #[test]
    fn subsequence_has_full_precision() {
        let p = rouge_l(&t("room clean"), &t("the room was very clean"));
        assert_eq!(p.precision, 1.0);
        assert!((p.recall - 0.4).abs() < 1e-15);
    }

    #[test]
    fn aggregation() {
        let cand = t("a b");
        let refs = vec![t("a b"), t("c d")];
        let mean = multi_ref_score(&cand, &refs, Aggregation::Mean).unwrap();
        assert!((mean.r1.f1 - 0.5).abs() < 1e-15);
        let max = multi_ref_score(&cand, &refs, Aggregation::Max).unwrap();
        assert_eq!(max.r1.f1, 1.0);
        let single = multi_ref_score(&cand, &refs[1..], Aggregation::Mean).unwrap();
        assert_eq!(single, RougeScore::compute(&cand, &refs[1]));
        let none: Vec<Vec<&str>> = vec![];
        assert_eq!(multi_ref_score(&cand, &none, Aggregation::Mean), Err(RougeError::NoReferences));
    }
}
