mod common;

use acesum_core::mil::{forward_tokens, loss_and_gradient, pool_variant, MilModel, Pooling};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

fn to_array(rows: &[Vec<f64>]) -> Array2<f64> {
    Array2::from_shape_fn((rows.len(), rows[0].len()), |(i, j)| rows[i][j])
}

fn random_rows<R: Rng>(rng: &mut R, n: usize, width: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..width).map(|_| rng.random_range(-scale..scale)).collect()).collect()
}

#[test]
fn pooling_matches_scalar_oracle_on_100_bags() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for bag in 0..100 {
        let d = rng.random_range(1..=8);
        let m = rng.random_range(1..=4);
        let heads = rng.random_range(1..=4);
        let k = rng.random_range(1..=12);
        let lower = random_rows(&mut rng, k, m, 1.0);
        let inputs = random_rows(&mut rng, k, d, 2.0);
        for pooling in Pooling::ALL {
            let model = MilModel::init(d, m, heads, pooling, bag as u64);
            let level = &model.sentence_pool;
            let got = pool_variant(pooling, to_array(&lower).view(), to_array(&inputs).view(), level).unwrap();
            let want = oracle_pool(pooling, &lower, &inputs, &level.heads);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() <= 1e-12, "bag {bag} {pooling}: {g} vs {w}");
            }
        }
    }
}

#[test]
fn forward_matches_scalar_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..40 {
        let d = rng.random_range(2..=8);
        let m = rng.random_range(1..=3);
        let table = random_table(&mut rng, 20, d);
        let mut sentences = random_sentences(&mut rng, 20, 5, 7);
        if case % 5 == 0 {
            sentences.insert(1, Vec::new());
        }
        let pooling = Pooling::ALL[case % 4];
        let model = MilModel::init(d, m, 3, pooling, case as u64);
        let got = forward_tokens(&sentences, &table, &model).unwrap();
        let want = oracle_forward(&model, &table, &sentences);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
        assert_eq!(got.tokens.nrows(), want.tokens.len());
        assert_eq!(got.sentences.nrows(), want.sentences.len());
        for (g, w) in got.tokens.rows().into_iter().zip(&want.tokens) {
            assert!(g.iter().zip(w).all(|(a, b)| close(*a, *b)));
        }
        for (g, w) in got.sentences.rows().into_iter().zip(&want.sentences) {
            assert!(g.iter().zip(w).all(|(a, b)| close(*a, *b)));
        }
        assert!(got.document.iter().zip(&want.document).all(|(a, b)| close(*a, *b)));
    }
}

/// Relative error of two gradient vectors, `|a - n| / (|a| + |n|)`.
fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic.iter().zip(numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
    let na: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nn: f64 = numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
    if na + nn == 0.0 {
        0.0
    } else {
        diff / (na + nn)
    }
}

#[test]
fn gradients_match_central_differences() {
    let step = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for case in 0..20 {
        let d = rng.random_range(2..=8);
        let m = rng.random_range(1..=3);
        let heads = rng.random_range(1..=2);
        let pooling = Pooling::ALL[case % 4];
        let table = random_table(&mut rng, 12, d);
        let sentences = random_sentences(&mut rng, 12, 4, 6);
        let label: Vec<f64> = (0..m).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let model = MilModel::init(d, m, heads, pooling, 100 + case as u64);

        let (_, grads) = loss_and_gradient(&sentences, &label, &table, &model).unwrap();
        let analytic: Vec<f64> = grads.tensors().concat();

        let loss_at = |m: &MilModel| {
            let z = oracle_forward(m, &table, &sentences).document;
            oracle_loss(&z, &label)
        };
        let mut numeric = Vec::with_capacity(analytic.len());
        let n_tensors = model.tensors().len();
        for t in 0..n_tensors {
            for i in 0..model.tensors()[t].len() {
                let mut plus = model.clone();
                plus.tensors_mut()[t][i] += step;
                let mut minus = model.clone();
                minus.tensors_mut()[t][i] -= step;
                numeric.push((loss_at(&plus) - loss_at(&minus)) / (2.0 * step));
            }
        }
        let err = relative_error(&analytic, &numeric);
        assert!(err < 1e-4, "case {case} ({pooling}, d={d}, M={m}, h={heads}): relative error {err}");
    }
}

#[test]
fn loss_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let table = random_table(&mut rng, 10, 4);
    let sentences = random_sentences(&mut rng, 10, 3, 5);
    let model = MilModel::init(4, 2, 2, Pooling::Mip, 3);
    let label = [1.0, -1.0];
    let (loss, _) = loss_and_gradient(&sentences, &label, &table, &model).unwrap();
    let want = oracle_loss(&oracle_forward(&model, &table, &sentences).document, &label);
    assert!((loss - want).abs() < 1e-12);
}
