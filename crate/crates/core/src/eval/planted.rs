//! Synthetic corpora whose sentence aspects are known by construction.
//!
//! Every aspect owns a disjoint set of words whose vectors scatter around
//! an aspect-specific direction; a shared pool of filler words scatters
//! around the origin. A sentence mixes a few words of one aspect with
//! filler, and seed words are a strict subset of each aspect's words, so
//! silver labels miss some truly positive reviews.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::{AspectSpec, Corpus, Review};
use crate::encoder::EmbeddingTable;
use crate::mil::TrainConfig;

/// Shape of a planted corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantedSpec {
    pub aspect_names: Vec<String>,
    pub dim: usize,
    pub words_per_aspect: usize,
    pub seeds_per_aspect: usize,
    pub filler_words: usize,
    /// Standard deviation of each vector component around its centre.
    pub noise: f64,
    /// Inclusive ranges.
    pub aspects_per_review: (usize, usize),
    pub sentences_per_review: (usize, usize),
    pub aspect_words_per_sentence: (usize, usize),
    pub filler_words_per_sentence: (usize, usize),
    /// Probability that a sentence also mentions one word of another
    /// aspect in passing. The sentence keeps its single gold aspect.
    pub stray_rate: f64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        Self {
            aspect_names: ["location", "rooms", "food"].map(String::from).to_vec(),
            dim: 16,
            words_per_aspect: 10,
            seeds_per_aspect: 5,
            filler_words: 40,
            noise: 0.3,
            aspects_per_review: (1, 2),
            sentences_per_review: (2, 5),
            aspect_words_per_sentence: (1, 3),
            filler_words_per_sentence: (3, 7),
            stray_rate: 0.05,
        }
    }
}

/// A corpus plus its gold sentence and review aspects and the embedding
/// table it was generated with.
#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub corpus: Corpus,
    pub table: EmbeddingTable,
    /// Gold aspect of every sentence, keyed by review id.
    pub sentence_gold: BTreeMap<String, Vec<usize>>,
    pub spec: PlantedSpec,
    /// Vocabulary of each aspect; seeds are its first `seeds_per_aspect` words.
    pub aspect_words: Vec<Vec<String>>,
}

impl PlantedCorpus {
    /// Union of the review's sentence aspects.
    pub fn document_gold(&self, review_id: &str) -> BTreeSet<usize> {
        self.sentence_gold
            .get(review_id)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default()
    }

    /// Gold aspect of a sentence, if the review and sentence exist.
    pub fn sentence_aspect(&self, review_id: &str, index: usize) -> Option<usize> {
        self.sentence_gold.get(review_id).and_then(|s| s.get(index)).copied()
    }
}

/// Training settings for planted-corpus experiments: a few thousand
/// updates at a higher learning rate than the full-scale defaults.
pub fn planted_train_config(seed: u64) -> TrainConfig {
    TrainConfig {
        learning_rate: 5e-3,
        steps: 2000,
        warmup_steps: 200,
        heads: 12,
        seed,
        log_every: 0,
        ..TrainConfig::default()
    }
}

pub fn aspect_word(aspect: usize, i: usize) -> String {
    format!("a{aspect}w{i}")
}

pub fn filler_word(i: usize) -> String {
    format!("f{i}")
}

fn in_range(rng: &mut ChaCha8Rng, (lo, hi): (usize, usize)) -> usize {
    rng.random_range(lo..=hi.max(lo))
}

fn capitalize(word: &str) -> String {
    let mut c = word.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Generates `n_entities * n_reviews` reviews. Fully determined by `seed`.
pub fn make_planted_corpus(seed: u64, n_entities: usize, n_reviews: usize, spec: &PlantedSpec) -> PlantedCorpus {
    let m = spec.aspect_names.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, spec.noise).expect("finite noise");

    // Aspect centres: random unit vectors.
    let centres: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            let v: Vec<f64> = (0..spec.dim).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
            let norm = v.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect();

    let mut pairs = Vec::new();
    let mut aspect_words = Vec::with_capacity(m);
    for (a, centre) in centres.iter().enumerate() {
        let words: Vec<String> = (0..spec.words_per_aspect).map(|i| aspect_word(a, i)).collect();
        for w in &words {
            let v = centre.iter().map(|c| c + normal.sample(&mut rng)).collect();
            pairs.push((w.clone(), v));
        }
        aspect_words.push(words);
    }
    let fillers: Vec<String> = (0..spec.filler_words).map(filler_word).collect();
    for w in &fillers {
        let v = (0..spec.dim).map(|_| normal.sample(&mut rng)).collect();
        pairs.push((w.clone(), v));
    }
    let table = EmbeddingTable::from_pairs(spec.dim, pairs).expect("consistent dimension");

    let aspects: Vec<AspectSpec> = spec
        .aspect_names
        .iter()
        .enumerate()
        .map(|(a, name)| {
            AspectSpec::new(a, name.clone(), &aspect_words[a][..spec.seeds_per_aspect.min(spec.words_per_aspect)])
                .expect("non-empty seeds")
        })
        .collect();

    let all_aspects: Vec<usize> = (0..m).collect();
    let mut reviews = Vec::new();
    let mut sentence_gold = BTreeMap::new();
    for e in 0..n_entities {
        for r in 0..n_reviews {
            let k = in_range(&mut rng, spec.aspects_per_review).clamp(1, m);
            let chosen: Vec<usize> = all_aspects.choose_multiple(&mut rng, k).copied().collect();
            let n_sent = in_range(&mut rng, spec.sentences_per_review).max(k);
            // Every chosen aspect appears at least once.
            let mut labels: Vec<usize> = chosen.clone();
            while labels.len() < n_sent {
                labels.push(*chosen.choose(&mut rng).expect("non-empty"));
            }
            labels.shuffle(&mut rng);

            let mut text = Vec::with_capacity(n_sent);
            for &a in &labels {
                let mut words: Vec<&str> = Vec::new();
                for _ in 0..in_range(&mut rng, spec.aspect_words_per_sentence) {
                    words.push(aspect_words[a].choose(&mut rng).expect("non-empty"));
                }
                if m > 1 && rng.random_bool(spec.stray_rate.clamp(0.0, 1.0)) {
                    let other = (a + rng.random_range(1..m)) % m;
                    words.push(aspect_words[other].choose(&mut rng).expect("non-empty"));
                }
                for _ in 0..in_range(&mut rng, spec.filler_words_per_sentence) {
                    words.push(fillers.choose(&mut rng).expect("non-empty"));
                }
                words.shuffle(&mut rng);
                text.push(format!("{}.", capitalize(&words.join(" "))));
            }
            let entity_id = format!("e{e:03}");
            let review_id = format!("e{e:03}-r{r:03}");
            sentence_gold.insert(review_id.clone(), labels);
            reviews.push(Review::new(entity_id, review_id, text.join(" ")));
        }
    }

    let corpus = Corpus::from_reviews("planted", reviews, aspects).expect("unique ids");
    PlantedCorpus { corpus, table, sentence_gold, spec: spec.clone(), aspect_words }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segmentation_matches_generation() {
        let p = make_planted_corpus(3, 4, 5, &PlantedSpec::default());
        assert_eq!(p.corpus.review_count(), 20);
        for r in p.corpus.reviews() {
            let gold = &p.sentence_gold[&r.review_id];
            assert_eq!(r.sentences.len(), gold.len());
            for (s, &a) in r.sentences.iter().zip(gold) {
                assert!(s.tokens.iter().any(|t| p.aspect_words[a].contains(t)));
                // At most one passing mention of another aspect.
                let stray = p
                    .aspect_words
                    .iter()
                    .enumerate()
                    .filter(|&(b, _)| b != a)
                    .map(|(_, words)| s.tokens.iter().filter(|t| words.contains(t)).count())
                    .sum::<usize>();
                assert!(stray <= 1);
            }
        }
    }

    #[test]
    fn vocabularies_are_disjoint() {
        let p = make_planted_corpus(1, 1, 1, &PlantedSpec::default());
        let mut all = BTreeSet::new();
        for words in &p.aspect_words {
            for w in words {
                assert!(all.insert(w.clone()));
            }
        }
    }

    #[test]
    fn seeded_repeatability() {
        let a = make_planted_corpus(9, 3, 4, &PlantedSpec::default());
        let b = make_planted_corpus(9, 3, 4, &PlantedSpec::default());
        assert_eq!(a.corpus, b.corpus);
        assert_eq!(a.table, b.table);
        let c = make_planted_corpus(10, 3, 4, &PlantedSpec::default());
        assert_ne!(a.corpus, c.corpus);
    }
}
