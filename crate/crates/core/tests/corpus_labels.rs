use acesum_core::corpus::{silver_label, split_sentences, tokenize, AspectSpec, Review};
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: &[&str] = &[
    "room", "Room", "ROOM", "bed", "staff", "Friendly", "breakfast", "the", "was", "great", "rooms", "bedroom",
    "walk", "station", "pool", "dirty", "clean", "food", "nice", "a", "location", "x1", "42",
];
const PUNCT: &[&str] = &[" ", " ", " ", ", ", ". ", "! ", "-", "'", " (", ") ", "\n"];

fn aspects() -> Vec<AspectSpec> {
    vec![
        AspectSpec::new(0, "rooms", ["room", "bed"]).unwrap(),
        AspectSpec::new(1, "service", ["staff", "friendly"]).unwrap(),
        AspectSpec::new(2, "location", ["location", "walk", "station"]).unwrap(),
        AspectSpec::new(3, "numbers", ["42"]).unwrap(),
    ]
}

fn random_text<R: Rng>(rng: &mut R) -> String {
    let n = rng.random_range(1..25);
    let mut s = String::new();
    for _ in 0..n {
        s.push_str(WORDS.choose(rng).unwrap());
        s.push_str(PUNCT.choose(rng).unwrap());
    }
    s
}

/// Character-level word splitter and a double loop over seeds and words.
fn oracle_label(text: &str, aspects: &[AspectSpec]) -> Vec<f64> {
    let mut words: Vec<String> = vec![String::new()];
    for c in text.chars() {
        if c.is_alphanumeric() {
            words.last_mut().unwrap().extend(c.to_lowercase());
        } else if !words.last().unwrap().is_empty() {
            words.push(String::new());
        }
    }
    aspects
        .iter()
        .map(|a| {
            let mut hit = false;
            for seed in &a.seeds {
                for w in &words {
                    if w == seed {
                        hit = true;
                    }
                }
            }
            if hit {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

#[test]
fn silver_labels_match_oracle_on_1000_reviews() {
    let aspects = aspects();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..1000 {
        let text = random_text(&mut rng);
        let review = Review::new("e", format!("r{i}"), text.clone());
        assert_eq!(silver_label(&review, &aspects), oracle_label(&text, &aspects), "{text:?}");
    }
}

#[test]
fn substrings_do_not_count() {
    let r = Review::new("e", "1", "The bedroom had roomy closets.");
    assert_eq!(silver_label(&r, &aspects())[0], -1.0);
}

proptest! {
    #[test]
    fn labels_are_signs_and_case_insensitive(words in proptest::collection::vec(0usize..WORDS.len(), 1..30)) {
        let text = words.iter().map(|&i| WORDS[i]).collect::<Vec<_>>().join(" ");
        let lower = Review::new("e", "1", text.to_lowercase());
        let upper = Review::new("e", "1", text.to_uppercase());
        let a = aspects();
        let label = silver_label(&lower, &a);
        prop_assert_eq!(label.len(), a.len());
        prop_assert!(label.iter().all(|&v| v == 1.0 || v == -1.0));
        prop_assert_eq!(&label, &silver_label(&upper, &a));
    }

    #[test]
    fn appending_a_seed_turns_its_aspect_on(words in proptest::collection::vec(0usize..WORDS.len(), 1..30), pick in 0usize..4) {
        let a = aspects();
        let seed = a[pick].seeds.iter().next().unwrap().clone();
        let text = words.iter().map(|&i| WORDS[i]).collect::<Vec<_>>().join(" ");
        let before = silver_label(&Review::new("e", "1", text.clone()), &a);
        let after = silver_label(&Review::new("e", "1", format!("{text} {seed}")), &a);
        prop_assert_eq!(after[pick], 1.0);
        for (i, (b, c)) in before.iter().zip(&after).enumerate() {
            if i != pick {
                prop_assert_eq!(b, c);
            }
        }
    }

    #[test]
    fn segmentation_keeps_every_token(text in "[A-Za-z0-9 .,!?\"()-]{0,120}") {
        let from_sentences: Vec<String> = split_sentences(&text).into_iter().flat_map(|s| s.tokens).collect();
        prop_assert_eq!(from_sentences, tokenize(&text));
    }
}
