use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{encode_sentences, forward_encoded, grad, soft_margin_grad, soft_margin_loss, MilError, MilModel, Pooling};
use crate::corpus::{silver_label, Corpus, Review, SilverLabel};
use crate::encoder::Encoder;

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("{reviews} reviews but {labels} labels")]
    LabelCount { reviews: usize, labels: usize },
    #[error("label of review {review_id:?} has {found} entries, expected {expected}")]
    LabelWidth { review_id: String, expected: usize, found: usize },
    #[error("no review with at least one token to train on")]
    NoData,
    #[error("non-finite loss at step {step}")]
    NonFinite { step: usize },
    #[error(transparent)]
    Model(#[from] MilError),
}

/// Optimisation settings for controller induction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub steps: usize,
    pub heads: usize,
    pub warmup_steps: usize,
    /// Decoupled weight decay coefficient.
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub pooling: Pooling,
    /// Training-time truncation; inference sees whole reviews.
    pub max_sentences: usize,
    pub max_sentence_tokens: usize,
    /// Log the mean loss every this many steps; 0 disables logging.
    pub log_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            steps: 100_000,
            heads: 12,
            warmup_steps: 10_000,
            weight_decay: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            pooling: Pooling::Mip,
            max_sentences: 128,
            max_sentence_tokens: 128,
            log_every: 1000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::Config(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.heads == 0 {
            return bad("heads must be at least 1");
        }
        if self.steps > 0 && self.warmup_steps > self.steps {
            return bad("warmup_steps must not exceed steps");
        }
        if self.weight_decay < 0.0 || !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("weight_decay must be >= 0 and betas in [0, 1)");
        }
        if self.epsilon <= 0.0 || self.max_sentences == 0 || self.max_sentence_tokens == 0 {
            return bad("epsilon and truncation limits must be positive");
        }
        Ok(())
    }

    /// Linear warm-up to `learning_rate`, constant afterwards.
    pub fn learning_rate_at(&self, step: usize) -> f64 {
        if self.warmup_steps == 0 {
            self.learning_rate
        } else {
            self.learning_rate * ((step + 1) as f64 / self.warmup_steps as f64).min(1.0)
        }
    }
}

/// Adam with decoupled weight decay.
#[derive(Debug, Clone)]
struct AdamW {
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    t: i32,
}

impl AdamW {
    fn new(model: &MilModel) -> Self {
        let zeros: Vec<Vec<f64>> = model.tensors().iter().map(|t| vec![0.0; t.len()]).collect();
        Self { first: zeros.clone(), second: zeros, t: 0 }
    }

    fn step(&mut self, model: &mut MilModel, grads: &MilModel, lr: f64, cfg: &TrainConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        let grads = grads.tensors();
        for (i, params) in model.tensors_mut().into_iter().enumerate() {
            let (m, v, g) = (&mut self.first[i], &mut self.second[i], grads[i]);
            for j in 0..params.len() {
                m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
                v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
                params[j] *= 1.0 - lr * cfg.weight_decay;
                params[j] -= lr * (m[j] / c1) / ((v[j] / c2).sqrt() + cfg.epsilon);
            }
        }
    }
}

/// Step-wise trainer over a fixed labelled review set.
pub struct Trainer<'a> {
    reviews: Vec<(&'a Review, &'a [f64])>,
    encoder: &'a dyn Encoder,
    config: TrainConfig,
    model: MilModel,
    optimizer: AdamW,
    rng: ChaCha8Rng,
    order: Vec<usize>,
    cursor: usize,
    step: usize,
}

impl<'a> Trainer<'a> {
    pub fn new(
        reviews: &[&'a Review],
        labels: &'a [SilverLabel],
        encoder: &'a dyn Encoder,
        config: TrainConfig,
    ) -> Result<Self, TrainError> {
        config.validate()?;
        if reviews.len() != labels.len() {
            return Err(TrainError::LabelCount { reviews: reviews.len(), labels: labels.len() });
        }
        let aspects = labels.first().map(Vec::len).unwrap_or(0);
        for (r, l) in reviews.iter().zip(labels) {
            if l.len() != aspects || aspects == 0 {
                return Err(TrainError::LabelWidth {
                    review_id: r.review_id.clone(),
                    expected: aspects.max(1),
                    found: l.len(),
                });
            }
        }
        let usable: Vec<(&Review, &[f64])> = reviews
            .iter()
            .zip(labels)
            .filter(|(r, _)| r.token_count() > 0)
            .map(|(r, l)| (*r, l.as_slice()))
            .collect();
        if usable.is_empty() && config.steps > 0 {
            return Err(TrainError::NoData);
        }
        let model = MilModel::init(encoder.dim(), aspects.max(1), config.heads, config.pooling, config.seed);
        let optimizer = AdamW::new(&model);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(1);
        let order = (0..usable.len()).collect();
        Ok(Self {
            reviews: usable,
            encoder,
            config,
            model,
            optimizer,
            rng,
            order,
            cursor: usize::MAX,
            step: 0,
        })
    }

    pub fn model(&self) -> &MilModel {
        &self.model
    }

    pub fn into_model(self) -> MilModel {
        self.model
    }

    pub fn steps_done(&self) -> usize {
        self.step
    }

    fn next_review(&mut self) -> usize {
        if self.cursor >= self.order.len() {
            self.order.shuffle(&mut self.rng);
            self.cursor = 0;
        }
        let i = self.order[self.cursor];
        self.cursor += 1;
        i
    }

    /// One optimizer update on one review; returns that review's loss.
    pub fn step(&mut self) -> Result<f64, TrainError> {
        let idx = self.next_review();
        let (review, label) = self.reviews[idx];
        let sentences: Vec<&[String]> = review
            .sentences
            .iter()
            .take(self.config.max_sentences)
            .map(|s| &s.tokens[..s.tokens.len().min(self.config.max_sentence_tokens)])
            .collect();
        let input = encode_sentences(&sentences, self.encoder)?;
        let trace = forward_encoded(&input, &self.model)?;
        let loss = soft_margin_loss(trace.document.view(), label);
        if !loss.is_finite() {
            return Err(TrainError::NonFinite { step: self.step });
        }
        let mut grads = self.model.zeros_like();
        let d_doc = soft_margin_grad(trace.document.view(), label);
        grad::backward(&input, &trace, &self.model, d_doc.view(), &mut grads);
        let lr = self.config.learning_rate_at(self.step);
        self.optimizer.step(&mut self.model, &grads, lr, &self.config);
        if !self.model.is_finite() {
            return Err(TrainError::NonFinite { step: self.step });
        }
        self.step += 1;
        Ok(loss)
    }

    /// Runs the remaining configured steps.
    pub fn run(mut self) -> Result<MilModel, TrainError> {
        let mut window = 0.0;
        while self.step < self.config.steps {
            window += self.step()?;
            let every = self.config.log_every;
            if every > 0 && self.step.is_multiple_of(every) {
                log::info!("step {} mean loss {:.5}", self.step, window / every as f64);
                window = 0.0;
            }
        }
        Ok(self.model)
    }
}

/// Trains a model on reviews paired with silver labels.
pub fn train(
    reviews: &[&Review],
    labels: &[SilverLabel],
    encoder: &dyn Encoder,
    config: &TrainConfig,
) -> Result<MilModel, TrainError> {
    Trainer::new(reviews, labels, encoder, config.clone())?.run()
}

/// Labels every review of the corpus with its seed words and trains on them.
pub fn train_corpus(corpus: &Corpus, encoder: &dyn Encoder, config: &TrainConfig) -> Result<MilModel, TrainError> {
    let reviews: Vec<&Review> = corpus.reviews().collect();
    let labels: Vec<SilverLabel> = reviews.iter().map(|r| silver_label(r, &corpus.aspects)).collect();
    train(&reviews, &labels, encoder, config)
}
