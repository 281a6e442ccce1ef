use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{aspect_f1, PlantedCorpus};
use crate::mil::{train_corpus, Pooling, TrainConfig, TrainError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub pooling: Pooling,
    pub doc_f1: f64,
    pub sent_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
}

impl AblationReport {
    pub fn row(&self, pooling: Pooling) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.pooling == pooling)
    }

    /// One JSON object per row.
    pub fn to_records(&self) -> String {
        self.rows
            .iter()
            .map(|r| serde_json::to_string(r).expect("plain data") + "\n")
            .collect()
    }
}

impl fmt::Display for AblationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<10} {:>8} {:>8}", "Model", "Doc F1", "Sent F1")?;
        for r in &self.rows {
            writeln!(f, "{:<10} {:>8.2} {:>8.2}", r.pooling.name(), 100.0 * r.doc_f1, 100.0 * r.sent_f1)?;
        }
        Ok(())
    }
}

/// Trains one model per pooling variant with otherwise identical settings
/// and reports review- and sentence-level aspect F1 on the planted gold.
pub fn run_ablation(
    planted: &PlantedCorpus,
    base: &TrainConfig,
    variants: &[Pooling],
) -> Result<AblationReport, TrainError> {
    let rows = variants
        .par_iter()
        .map(|&pooling| {
            let config = TrainConfig { pooling, ..base.clone() };
            let model = train_corpus(&planted.corpus, &planted.table, &config)?;
            let f1 = aspect_f1(&model, planted, &planted.table)?;
            Ok(AblationRow { pooling, doc_f1: f1.doc_f1, sent_f1: f1.sent_f1 })
        })
        .collect::<Result<Vec<_>, TrainError>>()?;
    Ok(AblationReport { rows })
}
