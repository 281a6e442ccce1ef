//! Evaluation: ROUGE, aspect prediction F1, planted corpora and pooling
//! ablations.

mod ablation;
mod planted;
mod report;
mod rouge;

pub use ablation::{run_ablation, AblationReport, AblationRow};
pub use planted::{aspect_word, filler_word, make_planted_corpus, planted_train_config, PlantedCorpus, PlantedSpec};
pub use report::{evaluate, EvalReport, EvalRow, System};
pub use rouge::{lcs_len, multi_ref_score, rouge_l, rouge_n, Aggregation, RougeError, RougeScore, Prf};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::encoder::Encoder;
use crate::mil::{forward, positive_aspects, MilError, MilModel};

/// True/false positive and false negative counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn add(&mut self, predicted: &BTreeSet<usize>, gold: &BTreeSet<usize>) {
        self.tp += predicted.intersection(gold).count();
        self.fp += predicted.difference(gold).count();
        self.fn_ += gold.difference(predicted).count();
    }

    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }
}

/// Micro-averaged aspect F1 at review and sentence level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AspectF1 {
    pub doc_f1: f64,
    pub sent_f1: f64,
    pub doc: Confusion,
    pub sent: Confusion,
}

/// Binarizes review and sentence predictions at 0 and scores them against
/// the planted gold labels.
pub fn aspect_f1(model: &MilModel, planted: &PlantedCorpus, encoder: &dyn Encoder) -> Result<AspectF1, MilError> {
    let mut doc = Confusion::default();
    let mut sent = Confusion::default();
    for review in planted.corpus.reviews() {
        let preds = forward(review, encoder, model)?;
        doc.add(&positive_aspects(preds.document.view()), &planted.document_gold(&review.review_id));
        for (i, row) in preds.sentences.rows().into_iter().enumerate() {
            let gold: BTreeSet<usize> = planted.sentence_aspect(&review.review_id, i).into_iter().collect();
            sent.add(&positive_aspects(row), &gold);
        }
    }
    Ok(AspectF1 { doc_f1: doc.f1(), sent_f1: sent.f1(), doc, sent })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_f1() {
        let mut c = Confusion::default();
        c.add(&BTreeSet::from([0, 1]), &BTreeSet::from([1, 2]));
        assert_eq!(c, Confusion { tp: 1, fp: 1, fn_: 1 });
        assert!((c.f1() - 0.5).abs() < 1e-15);
        let mut none = Confusion::default();
        none.add(&BTreeSet::new(), &BTreeSet::from([1]));
        assert_eq!(none.f1(), 0.0);
        assert_eq!(Confusion::default().f1(), 0.0);
    }
}
