//! Reverse-mode gradients through token prediction and both pooling levels.
//!
//! Key inputs (token encodings and sentence representations) are frozen, so
//! gradients reach lower levels only through the pooled predictions.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::{EncodedReview, Head, MilModel, PoolLevel, PoolTrace, Pooling, ReviewTrace};

/// Accumulates `d loss / d parameters` into `grads` given `d loss / d z_D`.
pub(super) fn backward(
    input: &EncodedReview,
    trace: &ReviewTrace,
    model: &MilModel,
    d_document: ArrayView1<'_, f64>,
    grads: &mut MilModel,
) {
    let d_sentences = pool_backward(
        model.pooling,
        trace.sentence_preds.view(),
        input.reprs.view(),
        &trace.document_trace,
        &model.document_pool,
        d_document,
        &mut grads.document_pool,
    );

    for (s, enc) in input.sentences.iter().enumerate() {
        let z_t = &trace.token_preds[s];
        let d_tokens = pool_backward(
            model.pooling,
            z_t.view(),
            enc.view(),
            &trace.sentence_traces[s],
            &model.sentence_pool,
            d_sentences.row(s),
            &mut grads.sentence_pool,
        );
        // z = tanh(pre): d pre = d z * (1 - z^2)
        let d_pre = &d_tokens * &z_t.mapv(|z| 1.0 - z * z);
        grads.token_weight += &d_pre.t().dot(enc);
        grads.token_bias += &d_pre.sum_axis(Axis(0));
    }
}

/// Backpropagates through one pooling call. Returns the gradient with
/// respect to the lower-level predictions and accumulates head gradients.
fn pool_backward(
    pooling: Pooling,
    lower: ArrayView2<'_, f64>,
    inputs: ArrayView2<'_, f64>,
    trace: &PoolTrace,
    level: &PoolLevel,
    d_out: ArrayView1<'_, f64>,
    grads: &mut PoolLevel,
) -> Array2<f64> {
    let (k, m) = lower.dim();
    let mut d_lower = Array2::zeros((k, m));
    match pooling {
        Pooling::Mean => {
            let share = d_out.mapv(|g| g / k as f64);
            d_lower.rows_mut().into_iter().for_each(|mut r| r.assign(&share));
        }
        Pooling::Max => {
            for (a, &winner) in trace.winners.iter().enumerate() {
                d_lower[[winner, a]] += d_out[a];
            }
        }
        Pooling::Mip | Pooling::Attention => {
            let heads = trace.attention.len();
            let mut d_heads = Array2::zeros((heads, m));
            for (a, &winner) in trace.winners.iter().enumerate() {
                d_heads[[winner, a]] += d_out[a];
            }
            for h in 0..heads {
                let d_head = d_heads.row(h);
                if d_head.iter().all(|&g| g == 0.0) {
                    continue;
                }
                attention_backward(
                    lower,
                    inputs,
                    &trace.keys[h],
                    &trace.attention[h],
                    &level.heads[h],
                    d_head,
                    &mut d_lower,
                    &mut grads.heads[h],
                );
            }
        }
    }
    d_lower
}

/// One head: `z_h = sum_k a[k] * lower[k]`, `a = softmax(keys · query)`,
/// `keys = tanh(W x + b)`.
#[allow(clippy::too_many_arguments)]
fn attention_backward(
    lower: ArrayView2<'_, f64>,
    inputs: ArrayView2<'_, f64>,
    keys: &Array2<f64>,
    attention: &Array1<f64>,
    head: &Head,
    d_head: ArrayView1<'_, f64>,
    d_lower: &mut Array2<f64>,
    grad: &mut Head,
) {
    // Weighted sum.
    for (mut row, &a) in d_lower.rows_mut().into_iter().zip(attention) {
        row.scaled_add(a, &d_head);
    }
    let d_attention = lower.dot(&d_head);

    // Softmax.
    let inner = attention.dot(&d_attention);
    let d_scores = attention * &(d_attention - inner);

    // Scores = keys · query.
    grad.query += &keys.t().dot(&d_scores);
    let mut d_keys = Array2::zeros(keys.raw_dim());
    for (mut row, &ds) in d_keys.rows_mut().into_iter().zip(&d_scores) {
        row.scaled_add(ds, &head.query);
    }

    // Keys = tanh(W x + b).
    let d_pre = d_keys * &keys.mapv(|v| 1.0 - v * v);
    grad.weight += &d_pre.t().dot(&inputs);
    grad.bias += &d_pre.sum_axis(Axis(0));
}
