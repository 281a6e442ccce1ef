//! Helpers and scalar reference implementations shared by the integration
//! tests. The oracles use plain loops over `Vec<f64>` and never call the
//! library's numeric routines.
#![allow(dead_code, clippy::needless_range_loop)]

use acesum_core::encoder::EmbeddingTable;
use acesum_core::mil::{Head, MilModel, Pooling};
use rand::Rng;

pub fn word(i: usize) -> String {
    format!("w{i}")
}

pub fn random_table<R: Rng>(rng: &mut R, vocab: usize, dim: usize) -> EmbeddingTable {
    EmbeddingTable::from_pairs(
        dim,
        (0..vocab).map(|i| (word(i), (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>())),
    )
    .unwrap()
}

pub fn random_sentences<R: Rng>(rng: &mut R, vocab: usize, max_sentences: usize, max_len: usize) -> Vec<Vec<String>> {
    let n = rng.random_range(1..=max_sentences);
    (0..n)
        .map(|_| {
            let len = rng.random_range(1..=max_len);
            (0..len).map(|_| word(rng.random_range(0..vocab))).collect()
        })
        .collect()
}

pub fn rows(table: &EmbeddingTable, tokens: &[String]) -> Vec<Vec<f64>> {
    tokens.iter().map(|t| table.lookup(t).to_vec()).collect()
}

pub fn mean_rows(rows: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; rows[0].len()];
    for r in rows {
        for (o, v) in out.iter_mut().zip(r) {
            *o += v;
        }
    }
    out.iter().map(|v| v / rows.len() as f64).collect()
}

pub fn oracle_tokens(model: &MilModel, enc: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (m, d) = (model.aspect_count(), model.dim());
    enc.iter()
        .map(|e| {
            (0..m)
                .map(|a| {
                    let mut s = model.token_bias[a];
                    for j in 0..d {
                        s += model.token_weight[[a, j]] * e[j];
                    }
                    s.tanh()
                })
                .collect()
        })
        .collect()
}

/// Attention-weighted sum of `lower` for a single head.
pub fn oracle_head(head: &Head, lower: &[Vec<f64>], inputs: &[Vec<f64>]) -> Vec<f64> {
    let d = head.bias.len();
    let mut scores = Vec::new();
    for x in inputs {
        let mut score = 0.0;
        for i in 0..d {
            let mut pre = head.bias[i];
            for j in 0..d {
                pre += head.weight[[i, j]] * x[j];
            }
            score += pre.tanh() * head.query[i];
        }
        scores.push(score);
    }
    let total: f64 = scores.iter().map(|s| s.exp()).sum();
    let m = lower[0].len();
    let mut out = vec![0.0; m];
    for (k, s) in scores.iter().enumerate() {
        let a = s.exp() / total;
        for c in 0..m {
            out[c] += a * lower[k][c];
        }
    }
    out
}

pub fn oracle_pool(pooling: Pooling, lower: &[Vec<f64>], inputs: &[Vec<f64>], heads: &[Head]) -> Vec<f64> {
    let m = lower[0].len();
    match pooling {
        Pooling::Mean => (0..m).map(|c| lower.iter().map(|r| r[c]).sum::<f64>() / lower.len() as f64).collect(),
        Pooling::Max => (0..m).map(|c| lower.iter().map(|r| r[c]).fold(f64::NEG_INFINITY, f64::max)).collect(),
        Pooling::Attention => oracle_head(&heads[0], lower, inputs),
        Pooling::Mip => {
            let per_head: Vec<Vec<f64>> = heads.iter().map(|h| oracle_head(h, lower, inputs)).collect();
            (0..m).map(|c| per_head.iter().map(|r| r[c]).fold(f64::NEG_INFINITY, f64::max)).collect()
        }
    }
}

/// Token, sentence and review predictions of a review.
pub struct OracleForward {
    pub tokens: Vec<Vec<f64>>,
    pub sentences: Vec<Vec<f64>>,
    pub document: Vec<f64>,
}

pub fn oracle_forward(model: &MilModel, table: &EmbeddingTable, sentences: &[Vec<String>]) -> OracleForward {
    let mut tokens = Vec::new();
    let mut sent_preds = Vec::new();
    let mut reprs = Vec::new();
    for s in sentences.iter().filter(|s| !s.is_empty()) {
        let enc = rows(table, s);
        let z_t = oracle_tokens(model, &enc);
        sent_preds.push(oracle_pool(model.pooling, &z_t, &enc, &model.sentence_pool.heads));
        reprs.push(mean_rows(&enc));
        tokens.extend(z_t);
    }
    let document = oracle_pool(model.pooling, &sent_preds, &reprs, &model.document_pool.heads);
    OracleForward { tokens, sentences: sent_preds, document }
}

pub fn oracle_loss(z: &[f64], label: &[f64]) -> f64 {
    z.iter().zip(label).map(|(z, y)| (1.0 + (-z * y).exp()).ln()).sum()
}
