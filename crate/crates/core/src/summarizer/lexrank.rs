use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::encoder::{cosine, sentence_repr, Encoder};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LexRankConfig {
    pub damping: f64,
    pub similarity_threshold: f64,
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub summary_token_budget: usize,
}

impl Default for LexRankConfig {
    fn default() -> Self {
        Self {
            damping: 0.85,
            similarity_threshold: 0.1,
            max_iterations: 100,
            convergence_tol: 1e-6,
            summary_token_budget: 75,
        }
    }
}

impl LexRankConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(format!("damping must lie in (0, 1), got {}", self.damping));
        }
        if !self.similarity_threshold.is_finite() {
            return Err("similarity_threshold must be finite".into());
        }
        if self.max_iterations == 0 {
            return Err("max_iterations must be positive".into());
        }
        if self.convergence_tol.is_nan() || self.convergence_tol <= 0.0 {
            return Err("convergence_tol must be positive".into());
        }
        if self.summary_token_budget == 0 {
            return Err("summary_token_budget must be positive".into());
        }
        Ok(())
    }
}

/// Mean-embedding representation of each sentence, one row each. Sentences
/// without tokens get a zero row.
pub fn sentence_reprs<S: AsRef<[String]>>(sentences: &[S], encoder: &dyn Encoder) -> Array2<f64> {
    let mut out = Array2::zeros((sentences.len(), encoder.dim()));
    for (mut row, s) in out.rows_mut().into_iter().zip(sentences) {
        if let Ok(r) = sentence_repr(encoder.encode(s.as_ref()).view()) {
            row.assign(&r);
        }
    }
    out
}

/// Cosine of the two sentence representations, 0 if either is empty or
/// entirely out of vocabulary.
pub fn sentence_similarity(s1: &[String], s2: &[String], encoder: &dyn Encoder) -> f64 {
    let reprs = sentence_reprs(&[s1, s2], encoder);
    cosine(reprs.row(0), reprs.row(1))
}

/// Row-stochastic transition matrix of the thresholded similarity graph.
/// Rows without any edge are left at zero.
pub fn transition_matrix(reprs: ArrayView2<'_, f64>, threshold: f64) -> Array2<f64> {
    let n = reprs.nrows();
    let mut p = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if cosine(reprs.row(i), reprs.row(j)) >= threshold {
                p[[i, j]] = 1.0;
            }
        }
        let degree: f64 = p.row(i).sum();
        if degree > 0.0 {
            p.row_mut(i).mapv_inplace(|v| v / degree);
        }
    }
    p
}

/// LexRank salience over precomputed sentence representations. Mass on
/// rows without edges is spread uniformly, so the result always sums to 1.
pub fn lexrank_reprs(reprs: ArrayView2<'_, f64>, config: &LexRankConfig) -> Array1<f64> {
    let n = reprs.nrows();
    if n == 0 {
        return Array1::zeros(0);
    }
    let p = transition_matrix(reprs, config.similarity_threshold);
    let dangling: Vec<usize> = (0..n).filter(|&i| p.row(i).sum() == 0.0).collect();
    let uniform = 1.0 / n as f64;
    let mut x = Array1::from_elem(n, uniform);
    for _ in 0..config.max_iterations {
        let lost: f64 = dangling.iter().map(|&i| x[i]).sum();
        let mut next = p.t().dot(&x);
        next.mapv_inplace(|v| config.damping * (v + lost * uniform) + (1.0 - config.damping) * uniform);
        let change: f64 = (&next - &x).mapv(f64::abs).sum();
        x = next;
        if change < config.convergence_tol {
            break;
        }
    }
    let total = x.sum();
    x / total
}

/// LexRank salience of each sentence.
pub fn lexrank<S: AsRef<[String]>>(sentences: &[S], encoder: &dyn Encoder, config: &LexRankConfig) -> Array1<f64> {
    lexrank_reprs(sentence_reprs(sentences, encoder).view(), config)
}
