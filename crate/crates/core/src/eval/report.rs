use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{multi_ref_score, Aggregation, RougeScore};
use crate::corpus::{tokenize, AspectSpec, EvalExample};
use crate::encoder::Encoder;
use crate::mil::MilModel;
use crate::summarizer::{
    centroid_baseline, lexrank_baseline, seed_filter_summary, summarize, Query, SummarizerConfig, SummarizerError,
};

/// Systems compared on an evaluation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    AceSumExt,
    LexRank,
    Centroid,
    SeedFilter,
}

impl System {
    pub fn name(self) -> &'static str {
        match self {
            System::AceSumExt => "AceSumExt",
            System::LexRank => "LexRank",
            System::Centroid => "Centroid",
            System::SeedFilter => "SeedFilter",
        }
    }
}

/// Mean ROUGE F1 of one system on one setting (`general` or an aspect
/// name).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub system: System,
    pub setting: String,
    pub r1: f64,
    pub r2: f64,
    pub rl: f64,
    pub examples: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn to_records(&self) -> String {
        self.rows
            .iter()
            .map(|r| serde_json::to_string(r).expect("plain data") + "\n")
            .collect()
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12} {:<14} {:>6} {:>6} {:>6} {:>5}", "Model", "Setting", "R1", "R2", "RL", "N")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<12} {:<14} {:>6.2} {:>6.2} {:>6.2} {:>5}",
                r.system.name(),
                r.setting,
                100.0 * r.r1,
                100.0 * r.r2,
                100.0 * r.rl,
                r.examples
            )?;
        }
        Ok(())
    }
}

type Scored = (System, String, RougeScore);

fn score(system: System, setting: &str, candidate: &str, refs: &[String], agg: Aggregation) -> Option<Scored> {
    let refs: Vec<Vec<String>> = refs.iter().map(|r| tokenize(r)).collect();
    let cand = tokenize(candidate);
    multi_ref_score(&cand, &refs, agg).ok().map(|s| (system, setting.to_string(), s))
}

fn score_example(
    ex: &EvalExample,
    model: &MilModel,
    encoder: &dyn Encoder,
    aspects: &[AspectSpec],
    config: &SummarizerConfig,
    agg: Aggregation,
) -> Result<Vec<Scored>, SummarizerError> {
    let reviews = &ex.input_reviews;
    let mut out = Vec::new();
    if reviews.is_empty() {
        return Ok(out);
    }
    let m = model.aspect_count();
    let general = summarize(reviews, &Query::general(m)?, model, encoder, config)?;
    out.extend(score(System::AceSumExt, "general", &general.text(), &ex.general_refs, agg));
    out.extend(score(System::LexRank, "general", &lexrank_baseline(reviews, encoder, config).text(), &ex.general_refs, agg));
    out.extend(score(System::Centroid, "general", &centroid_baseline(reviews, encoder).text, &ex.general_refs, agg));
    for (&a, refs) in &ex.aspect_refs {
        let name = &aspects[a].name;
        let s = summarize(reviews, &Query::from_codes(m, [a])?, model, encoder, config)?;
        out.extend(score(System::AceSumExt, name, &s.text(), refs, agg));
        let seed = seed_filter_summary(reviews, &aspects[a], encoder, config);
        out.extend(score(System::SeedFilter, name, &seed.text(), refs, agg));
    }
    Ok(out)
}

/// Scores every system against the references of each example. Examples
/// run in parallel; means are reduced in example order.
pub fn evaluate(
    examples: &[EvalExample],
    model: &MilModel,
    encoder: &dyn Encoder,
    aspects: &[AspectSpec],
    config: &SummarizerConfig,
    aggregation: Aggregation,
) -> Result<EvalReport, SummarizerError> {
    let per_example = examples
        .par_iter()
        .map(|ex| score_example(ex, model, encoder, aspects, config, aggregation))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows: Vec<EvalRow> = Vec::new();
    for (system, setting, s) in per_example.into_iter().flatten() {
        let row = match rows.iter_mut().find(|r| r.system == system && r.setting == setting) {
            Some(r) => r,
            None => {
                rows.push(EvalRow { system, setting, r1: 0.0, r2: 0.0, rl: 0.0, examples: 0 });
                rows.last_mut().expect("just pushed")
            }
        };
        row.r1 += s.r1.f1;
        row.r2 += s.r2.f1;
        row.rl += s.rl.f1;
        row.examples += 1;
    }
    for r in &mut rows {
        let n = r.examples as f64;
        r.r1 /= n;
        r.r2 /= n;
        r.rl /= n;
    }
    rows.sort_by(|a, b| (a.setting != "general", &a.setting, a.system).cmp(&(b.setting != "general", &b.setting, b.system)));
    Ok(EvalReport { rows })
}
