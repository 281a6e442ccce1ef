use ndarray::Array1;

use super::{extract_summary, lexrank_reprs, sentence_reprs, Summary, SummarizerConfig};
use crate::corpus::{AspectSpec, Review, Sentence};
use crate::encoder::{cosine, Encoder};
use crate::synthesis::RankedSentence;

/// Scores each sentence by its best token-to-seed cosine and sorts by
/// descending score; ties keep input order.
pub fn seed_filter_baseline<'a>(
    sentences: &[&'a Sentence],
    aspect: &AspectSpec,
    encoder: &dyn Encoder,
) -> Vec<(&'a Sentence, f64)> {
    let seeds: Vec<String> = aspect.seeds.iter().cloned().collect();
    let seed_vecs = encoder.encode(&seeds);
    let mut scored: Vec<(&Sentence, f64)> = sentences
        .iter()
        .map(|&s| {
            let toks = encoder.encode(&s.tokens);
            let mut best = 0.0f64;
            let mut any = false;
            for t in toks.rows() {
                for sv in seed_vecs.rows() {
                    let c = cosine(t, sv);
                    best = if any { best.max(c) } else { c };
                    any = true;
                }
            }
            (s, best)
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    scored
}

/// The seed-filtered sentences of an entity, greedily packed into the
/// summary budget in rank order and returned in document order.
pub fn seed_filter_summary(
    entity_reviews: &[Review],
    aspect: &AspectSpec,
    encoder: &dyn Encoder,
    config: &SummarizerConfig,
) -> Summary {
    let pool = all_sentences(entity_reviews);
    let sentences: Vec<&Sentence> = pool.iter().map(|r| r.sentence).collect();
    let ranked = seed_filter_baseline(&sentences, aspect, encoder);
    // Rank order becomes descending salience for the shared assembler.
    let n = ranked.len() as f64;
    let mut scores = Array1::zeros(pool.len());
    for (rank, (s, _)) in ranked.iter().enumerate() {
        let i = pool.iter().position(|r| std::ptr::eq(r.sentence, *s)).expect("sentence from pool");
        scores[i] = (n - rank as f64) / n;
    }
    let tokens: Vec<&[String]> = sentences.iter().map(|s| s.tokens.as_slice()).collect();
    let reprs = sentence_reprs(&tokens, encoder);
    extract_summary(&pool, scores.view(), reprs.view(), config)
}

/// LexRank over every sentence of the entity, without controllers.
pub fn lexrank_baseline(entity_reviews: &[Review], encoder: &dyn Encoder, config: &SummarizerConfig) -> Summary {
    let pool = all_sentences(entity_reviews);
    let tokens: Vec<&[String]> = pool.iter().map(|r| r.sentence.tokens.as_slice()).collect();
    let reprs = sentence_reprs(&tokens, encoder);
    let scores = lexrank_reprs(reprs.view(), &config.lexrank);
    extract_summary(&pool, scores.view(), reprs.view(), config)
}

/// The review closest in cosine to the mean review representation. Ties go
/// to the lowest review id. Panics on an empty slice.
pub fn centroid_baseline<'a>(entity_reviews: &'a [Review], encoder: &dyn Encoder) -> &'a Review {
    assert!(!entity_reviews.is_empty(), "centroid of no reviews");
    let reprs: Vec<Array1<f64>> = entity_reviews
        .iter()
        .map(|r| {
            let s = sentence_reprs(&r.sentences.iter().map(|s| s.tokens.as_slice()).collect::<Vec<_>>(), encoder);
            s.mean_axis(ndarray::Axis(0)).unwrap_or_else(|| Array1::zeros(encoder.dim()))
        })
        .collect();
    let mut centre = Array1::zeros(encoder.dim());
    for r in &reprs {
        centre += r;
    }
    centre /= reprs.len() as f64;
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in reprs.iter().enumerate() {
        let dist = 1.0 - cosine(r.view(), centre.view());
        let better = match best {
            None => true,
            Some((j, d)) => {
                dist < d || (dist == d && entity_reviews[i].review_id < entity_reviews[j].review_id)
            }
        };
        if better {
            best = Some((i, dist));
        }
    }
    &entity_reviews[best.expect("non-empty").0]
}

fn all_sentences(entity_reviews: &[Review]) -> Vec<RankedSentence<'_>> {
    entity_reviews
        .iter()
        .enumerate()
        .flat_map(|(pos, review)| {
            review.sentences.iter().map(move |sentence| RankedSentence { review, review_pos: pos, sentence, score: 0.0 })
        })
        .collect()
}
