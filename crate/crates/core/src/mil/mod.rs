//! Controller induction: a multiple instance learning model that predicts
//! aspects for tokens, sentences and whole reviews while only ever being
//! trained on review-level labels.
//!
//! Tokens are scored by `tanh(W e + b)`. Token scores are pooled into
//! sentence scores and sentence scores into a review score by multiple
//! instance pooling: every attention head forms a convex combination of the
//! lower-level scores and the heads are combined with a per-aspect max.

mod grad;
mod io;
mod train;

pub use io::{read_model, write_model, ModelFormatError, MODEL_FORMAT_VERSION};
pub use train::{train, train_corpus, Trainer, TrainConfig, TrainError};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Review;
use crate::encoder::{sentence_repr, Encoder};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MilError {
    #[error("empty bag")]
    EmptyBag,
    #[error("review has no tokens")]
    EmptyReview,
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

/// How lower-level predictions are aggregated into a bag prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    /// Multiple instance pooling: per-head attention, then max over heads.
    #[default]
    Mip,
    Max,
    Mean,
    /// A single attention head with no outer max.
    Attention,
}

impl Pooling {
    pub const ALL: [Pooling; 4] = [Pooling::Mip, Pooling::Max, Pooling::Attention, Pooling::Mean];

    pub fn name(self) -> &'static str {
        match self {
            Pooling::Mip => "mip",
            Pooling::Max => "max",
            Pooling::Mean => "mean",
            Pooling::Attention => "attention",
        }
    }
}

impl fmt::Display for Pooling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pooling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pooling::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown pooling {s:?}"))
    }
}

/// Parameters of one attention head.
#[derive(Debug, Clone, PartialEq)]
pub struct Head {
    /// d × d, applied as `weight · x`.
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
    pub query: Array1<f64>,
}

impl Head {
    fn zeros(dim: usize) -> Self {
        Self {
            weight: Array2::zeros((dim, dim)),
            bias: Array1::zeros(dim),
            query: Array1::zeros(dim),
        }
    }

    /// `tanh(weight · x_k + bias)` for every row `x_k` of `inputs`.
    fn keys(&self, inputs: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut keys = inputs.dot(&self.weight.t());
        keys += &self.bias;
        keys.mapv_inplace(f64::tanh);
        keys
    }
}

/// The heads used at one pooling level (tokens to sentence, or sentences to
/// review).
#[derive(Debug, Clone, PartialEq)]
pub struct PoolLevel {
    pub heads: Vec<Head>,
}

/// Review-level aspect predictions at all three granularities.
#[derive(Debug, Clone, PartialEq)]
pub struct AspectPredictions {
    /// One row per token, review order.
    pub tokens: Array2<f64>,
    /// One row per sentence.
    pub sentences: Array2<f64>,
    pub document: Array1<f64>,
    /// Row range of each sentence inside `tokens`.
    pub sentence_spans: Vec<std::ops::Range<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilModel {
    pub pooling: Pooling,
    /// M × d.
    pub token_weight: Array2<f64>,
    pub token_bias: Array1<f64>,
    pub sentence_pool: PoolLevel,
    pub document_pool: PoolLevel,
}

impl MilModel {
    /// Zero-initialised model. The attention variant always has one head.
    pub fn zeros(dim: usize, aspects: usize, heads: usize, pooling: Pooling) -> Self {
        let heads = if pooling == Pooling::Attention { 1 } else { heads.max(1) };
        let level = || PoolLevel { heads: (0..heads).map(|_| Head::zeros(dim)).collect() };
        Self {
            pooling,
            token_weight: Array2::zeros((aspects, dim)),
            token_bias: Array1::zeros(aspects),
            sentence_pool: level(),
            document_pool: level(),
        }
    }

    /// Every parameter drawn uniformly from `[-1/sqrt(d), 1/sqrt(d)]`.
    pub fn init(dim: usize, aspects: usize, heads: usize, pooling: Pooling, seed: u64) -> Self {
        let mut model = Self::zeros(dim, aspects, heads, pooling);
        let bound = 1.0 / (dim as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for t in model.tensors_mut() {
            for v in t.iter_mut() {
                *v = rng.random_range(-bound..=bound);
            }
        }
        model
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.dim(), self.aspect_count(), self.head_count(), self.pooling)
    }

    pub fn dim(&self) -> usize {
        self.token_weight.ncols()
    }

    pub fn aspect_count(&self) -> usize {
        self.token_weight.nrows()
    }

    pub fn head_count(&self) -> usize {
        self.sentence_pool.heads.len()
    }

    /// All parameter tensors in a fixed order: token weight, token bias,
    /// then weight, bias and query of every sentence-level head followed by
    /// every document-level head.
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out = vec![
            self.token_weight.as_slice().expect("standard layout"),
            self.token_bias.as_slice().expect("standard layout"),
        ];
        for level in [&self.sentence_pool, &self.document_pool] {
            for h in &level.heads {
                out.push(h.weight.as_slice().expect("standard layout"));
                out.push(h.bias.as_slice().expect("standard layout"));
                out.push(h.query.as_slice().expect("standard layout"));
            }
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = vec![
            self.token_weight.as_slice_mut().expect("standard layout"),
            self.token_bias.as_slice_mut().expect("standard layout"),
        ];
        for level in [&mut self.sentence_pool, &mut self.document_pool] {
            for h in &mut level.heads {
                out.push(h.weight.as_slice_mut().expect("standard layout"));
                out.push(h.bias.as_slice_mut().expect("standard layout"));
                out.push(h.query.as_slice_mut().expect("standard layout"));
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }
}

/// Token-level predictions `tanh(W e_k + b)`, one row per token.
pub fn token_predict(encodings: ArrayView2<'_, f64>, model: &MilModel) -> Result<Array2<f64>, MilError> {
    if encodings.ncols() != model.dim() {
        return Err(MilError::Shape(format!(
            "encodings have {} columns, model expects {}",
            encodings.ncols(),
            model.dim()
        )));
    }
    let mut z = encodings.dot(&model.token_weight.t());
    z += &model.token_bias;
    z.mapv_inplace(f64::tanh);
    Ok(z)
}

fn softmax(scores: &Array1<f64>) -> Array1<f64> {
    let max = scores.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let mut e = scores.mapv(|v| (v - max).exp());
    let sum = e.sum();
    e /= sum;
    e
}

/// Intermediate values of one pooling call that backpropagation needs.
#[derive(Debug, Clone)]
pub(crate) struct PoolTrace {
    /// Per head: K × d keys.
    keys: Vec<Array2<f64>>,
    /// Per head: attention over the K instances.
    attention: Vec<Array1<f64>>,
    /// Per aspect: the winning head (mip) or instance (max).
    winners: Vec<usize>,
}

fn check_bag(lower: ArrayView2<'_, f64>, inputs: ArrayView2<'_, f64>, level: &PoolLevel) -> Result<(), MilError> {
    if lower.nrows() == 0 {
        return Err(MilError::EmptyBag);
    }
    if lower.nrows() != inputs.nrows() {
        return Err(MilError::Shape(format!(
            "{} predictions but {} key inputs",
            lower.nrows(),
            inputs.nrows()
        )));
    }
    if let Some(h) = level.heads.first() {
        if h.weight.ncols() != inputs.ncols() {
            return Err(MilError::Shape(format!(
                "key inputs have {} columns, heads expect {}",
                inputs.ncols(),
                h.weight.ncols()
            )));
        }
    }
    Ok(())
}

/// Attention weights and the attended predictions of every head.
fn attend(
    lower: ArrayView2<'_, f64>,
    inputs: ArrayView2<'_, f64>,
    heads: &[Head],
) -> (Vec<Array2<f64>>, Vec<Array1<f64>>, Array2<f64>) {
    let mut keys = Vec::with_capacity(heads.len());
    let mut attention = Vec::with_capacity(heads.len());
    let mut per_head = Array2::zeros((heads.len(), lower.ncols()));
    for (h, head) in heads.iter().enumerate() {
        let k = head.keys(inputs);
        let a = softmax(&k.dot(&head.query));
        per_head.row_mut(h).assign(&a.dot(&lower));
        keys.push(k);
        attention.push(a);
    }
    (keys, attention, per_head)
}

/// Index of the largest value; the lowest index wins ties.
fn argmax(values: ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn pool_traced(
    pooling: Pooling,
    lower: ArrayView2<'_, f64>,
    inputs: ArrayView2<'_, f64>,
    level: &PoolLevel,
) -> Result<(Array1<f64>, PoolTrace), MilError> {
    check_bag(lower, inputs, level)?;
    let aspects = lower.ncols();
    match pooling {
        Pooling::Mip | Pooling::Attention => {
            let heads = if pooling == Pooling::Attention { &level.heads[..1] } else { &level.heads[..] };
            let (keys, attention, per_head) = attend(lower, inputs, heads);
            let winners: Vec<usize> = (0..aspects).map(|m| argmax(per_head.column(m))).collect();
            let out = Array1::from_iter(winners.iter().enumerate().map(|(m, &h)| per_head[[h, m]]));
            Ok((out, PoolTrace { keys, attention, winners }))
        }
        Pooling::Max => {
            let winners: Vec<usize> = (0..aspects).map(|m| argmax(lower.column(m))).collect();
            let out = Array1::from_iter(winners.iter().enumerate().map(|(m, &k)| lower[[k, m]]));
            Ok((out, PoolTrace { keys: vec![], attention: vec![], winners }))
        }
        Pooling::Mean => {
            let out = lower.mean_axis(Axis(0)).expect("non-empty bag");
            Ok((out, PoolTrace { keys: vec![], attention: vec![], winners: vec![] }))
        }
    }
}

/// Pools a bag of K lower-level predictions (K × M) into one M-vector,
/// using `inputs` (K × d) to compute attention keys where the variant
/// needs them.
pub fn pool_variant(
    pooling: Pooling,
    lower: ArrayView2<'_, f64>,
    inputs: ArrayView2<'_, f64>,
    level: &PoolLevel,
) -> Result<Array1<f64>, MilError> {
    pool_traced(pooling, lower, inputs, level).map(|(out, _)| out)
}

/// Multiple instance pooling over one bag.
pub fn mip_pool(
    lower: ArrayView2<'_, f64>,
    inputs: ArrayView2<'_, f64>,
    level: &PoolLevel,
) -> Result<Array1<f64>, MilError> {
    pool_variant(Pooling::Mip, lower, inputs, level)
}

/// Frozen encodings of a review, one matrix per sentence, plus the
/// sentence representations used as document-level keys.
#[derive(Debug, Clone)]
pub(crate) struct EncodedReview {
    sentences: Vec<Array2<f64>>,
    reprs: Array2<f64>,
}

pub(crate) fn encode_sentences<S: AsRef<[String]>>(
    sentences: &[S],
    encoder: &dyn Encoder,
) -> Result<EncodedReview, MilError> {
    let sentences: Vec<Array2<f64>> = sentences
        .iter()
        .map(|s| s.as_ref())
        .filter(|s| !s.is_empty())
        .map(|s| encoder.encode(s))
        .collect();
    if sentences.is_empty() {
        return Err(MilError::EmptyReview);
    }
    let mut reprs = Array2::zeros((sentences.len(), encoder.dim()));
    for (mut row, e) in reprs.rows_mut().into_iter().zip(&sentences) {
        row.assign(&sentence_repr(e.view()).expect("non-empty sentence"));
    }
    Ok(EncodedReview { sentences, reprs })
}

#[derive(Debug, Clone)]
pub(crate) struct ReviewTrace {
    token_preds: Vec<Array2<f64>>,
    sentence_traces: Vec<PoolTrace>,
    sentence_preds: Array2<f64>,
    document_trace: PoolTrace,
    document: Array1<f64>,
}

pub(crate) fn forward_encoded(input: &EncodedReview, model: &MilModel) -> Result<ReviewTrace, MilError> {
    let mut token_preds = Vec::with_capacity(input.sentences.len());
    let mut sentence_traces = Vec::with_capacity(input.sentences.len());
    let mut sentence_preds = Array2::zeros((input.sentences.len(), model.aspect_count()));
    for (s, enc) in input.sentences.iter().enumerate() {
        let z_t = token_predict(enc.view(), model)?;
        let (z_s, trace) = pool_traced(model.pooling, z_t.view(), enc.view(), &model.sentence_pool)?;
        sentence_preds.row_mut(s).assign(&z_s);
        token_preds.push(z_t);
        sentence_traces.push(trace);
    }
    let (document, document_trace) =
        pool_traced(model.pooling, sentence_preds.view(), input.reprs.view(), &model.document_pool)?;
    Ok(ReviewTrace { token_preds, sentence_traces, sentence_preds, document_trace, document })
}

impl ReviewTrace {
    fn into_predictions(self) -> AspectPredictions {
        let mut spans = Vec::with_capacity(self.token_preds.len());
        let mut start = 0;
        for z in &self.token_preds {
            spans.push(start..start + z.nrows());
            start += z.nrows();
        }
        let views: Vec<_> = self.token_preds.iter().map(|z| z.view()).collect();
        let tokens = ndarray::concatenate(Axis(0), &views).expect("same aspect count");
        AspectPredictions {
            tokens,
            sentences: self.sentence_preds,
            document: self.document,
            sentence_spans: spans,
        }
    }
}

/// Runs the model over every sentence of a review.
pub fn forward(review: &Review, encoder: &dyn Encoder, model: &MilModel) -> Result<AspectPredictions, MilError> {
    let sentences: Vec<&[String]> = review.sentences.iter().map(|s| s.tokens.as_slice()).collect();
    forward_tokens(&sentences, encoder, model)
}

/// Same as [`forward`] for pre-split token lists. Empty sentences are
/// skipped.
pub fn forward_tokens<S: AsRef<[String]>>(
    sentences: &[S],
    encoder: &dyn Encoder,
    model: &MilModel,
) -> Result<AspectPredictions, MilError> {
    let input = encode_sentences(sentences, encoder)?;
    Ok(forward_encoded(&input, model)?.into_predictions())
}

/// Aspects with a positive review-level prediction.
pub fn predict_document_aspects(
    review: &Review,
    encoder: &dyn Encoder,
    model: &MilModel,
) -> Result<BTreeSet<usize>, MilError> {
    Ok(positive_aspects(forward(review, encoder, model)?.document.view()))
}

pub fn positive_aspects(z: ArrayView1<'_, f64>) -> BTreeSet<usize> {
    z.iter().enumerate().filter(|(_, &v)| v > 0.0).map(|(a, _)| a).collect()
}

/// `log(1 + exp(x))` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `sum_a log(1 + exp(-z[a] * label[a]))`.
pub fn soft_margin_loss(z: ArrayView1<'_, f64>, label: &[f64]) -> f64 {
    debug_assert_eq!(z.len(), label.len());
    z.iter().zip(label).map(|(&z, &y)| softplus(-z * y)).sum()
}

/// Derivative of [`soft_margin_loss`] with respect to `z`.
pub fn soft_margin_grad(z: ArrayView1<'_, f64>, label: &[f64]) -> Array1<f64> {
    Array1::from_iter(z.iter().zip(label).map(|(&z, &y)| -y * sigmoid(-z * y)))
}

/// Gradient of the review loss with respect to every model parameter.
/// Returns the loss and a model-shaped gradient.
pub fn loss_and_gradient<S: AsRef<[String]>>(
    sentences: &[S],
    label: &[f64],
    encoder: &dyn Encoder,
    model: &MilModel,
) -> Result<(f64, MilModel), MilError> {
    let input = encode_sentences(sentences, encoder)?;
    let trace = forward_encoded(&input, model)?;
    let loss = soft_margin_loss(trace.document.view(), label);
    let mut grads = model.zeros_like();
    grad::backward(&input, &trace, model, soft_margin_grad(trace.document.view(), label).view(), &mut grads);
    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::EmbeddingTable;
    use ndarray::array;

    fn level(dim: usize, heads: usize, seed: u64) -> PoolLevel {
        MilModel::init(dim, 1, heads, Pooling::Mip, seed).sentence_pool
    }

    #[test]
    fn zero_weights_give_zero_token_predictions() {
        let model = MilModel::zeros(3, 2, 1, Pooling::Mip);
        let e = array![[1.0, 2.0, 3.0], [-1.0, 0.5, 0.0]];
        assert_eq!(token_predict(e.view(), &model).unwrap(), Array2::<f64>::zeros((2, 2)));
    }

    #[test]
    fn token_predictions_saturate() {
        let mut model = MilModel::zeros(1, 1, 1, Pooling::Mip);
        model.token_weight[[0, 0]] = 50.0;
        let z = token_predict(array![[1.0]].view(), &model).unwrap();
        assert!(z[[0, 0]] > 1.0 - 1e-12 && z[[0, 0]] <= 1.0);
    }

    #[test]
    fn token_predict_shape_mismatch() {
        let model = MilModel::zeros(3, 2, 1, Pooling::Mip);
        assert!(matches!(token_predict(array![[1.0, 2.0]].view(), &model), Err(MilError::Shape(_))));
    }

    #[test]
    fn singleton_bag_passes_through() {
        let lower = array![[0.3, -0.7]];
        let inputs = array![[0.1, 0.2, -0.3]];
        let lvl = level(3, 3, 7);
        for p in Pooling::ALL {
            let out = pool_variant(p, lower.view(), inputs.view(), &lvl).unwrap();
            assert!((&out - &lower.row(0)).iter().all(|d| d.abs() < 1e-15), "{p}");
        }
    }

    #[test]
    fn equal_keys_give_the_mean() {
        let lower = array![[0.2, 0.4], [0.6, -0.8], [0.1, 0.1]];
        let inputs = array![[0.5, 0.5], [0.5, 0.5], [0.5, 0.5]];
        let out = mip_pool(lower.view(), inputs.view(), &level(2, 1, 3)).unwrap();
        let mean = lower.mean_axis(Axis(0)).unwrap();
        assert!((&out - &mean).iter().all(|d| d.abs() < 1e-15));
    }

    #[test]
    fn max_and_mean_definitions() {
        let lower = array![[0.9, -0.9], [-0.9, 0.9]];
        let inputs = array![[1.0], [2.0]];
        let lvl = level(1, 1, 1);
        assert_eq!(pool_variant(Pooling::Max, lower.view(), inputs.view(), &lvl).unwrap(), array![0.9, 0.9]);
        assert_eq!(pool_variant(Pooling::Mean, lower.view(), inputs.view(), &lvl).unwrap(), array![0.0, 0.0]);
    }

    #[test]
    fn empty_bag_is_an_error() {
        let lower = Array2::<f64>::zeros((0, 2));
        let inputs = Array2::<f64>::zeros((0, 3));
        for p in Pooling::ALL {
            assert_eq!(pool_variant(p, lower.view(), inputs.view(), &level(3, 2, 0)), Err(MilError::EmptyBag));
        }
    }

    #[test]
    fn soft_margin_values() {
        let ln2 = std::f64::consts::LN_2;
        assert!((soft_margin_loss(array![0.0, 0.0, 0.0].view(), &[1.0, -1.0, 1.0]) - 3.0 * ln2).abs() < 1e-15);
        assert!(soft_margin_loss(array![800.0].view(), &[1.0]) < 1e-300);
        assert!(soft_margin_loss(array![-800.0].view(), &[1.0]).is_finite());
    }

    #[test]
    fn single_token_review_cascades() {
        let table = EmbeddingTable::parse("room 0.3 -0.2\n").unwrap();
        let model = MilModel::init(2, 2, 3, Pooling::Mip, 11);
        let p = forward(&Review::new("e", "r", "Room"), &table, &model).unwrap();
        assert_eq!(p.tokens.row(0), p.sentences.row(0));
        assert_eq!(p.sentences.row(0), p.document);
    }

    #[test]
    fn empty_review_is_an_error() {
        let table = EmbeddingTable::parse("room 0.3 -0.2\n").unwrap();
        let model = MilModel::init(2, 2, 3, Pooling::Mip, 11);
        assert_eq!(forward(&Review::new("e", "r", "..."), &table, &model), Err(MilError::EmptyReview));
    }

    #[test]
    fn sign_rule() {
        assert_eq!(positive_aspects(array![0.2, -0.1].view()), BTreeSet::from([0]));
        assert!(positive_aspects(array![-0.2, -0.1].view()).is_empty());
    }

    #[test]
    fn pooling_names_round_trip() {
        for p in Pooling::ALL {
            assert_eq!(p.name().parse::<Pooling>().unwrap(), p);
        }
        assert!("sum".parse::<Pooling>().is_err());
    }
}
