//! Quality-aware decoding runs: score every N-best candidate, keep the argmax, and
//! measure the gender balance of the kept outputs.

use serde::{Deserialize, Serialize};

use super::AuditError;
use crate::downstream::{delta_m, gender_match, rerank, DeltaM, GenderMatchLabel, NbestRecord};
use crate::scoring::{CachedScorer, ScaleDescriptor, ScoreCache, ScoreEndpoint, ScoreRequest, ScoringError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QadChoice {
    pub instance_id: String,
    pub index: usize,
    pub hypothesis: String,
    pub label: GenderMatchLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QadReport {
    pub scorer: String,
    pub fold_case: bool,
    pub delta: DeltaM,
    pub choices: Vec<QadChoice>,
}

/// Reranks each N-best list by QE score and reports `δ_M` over the chosen outputs.
///
/// Every record needs its source text. `scale` overrides the scorer's declared scale.
pub fn run_qad(
    records: Vec<NbestRecord>,
    scorer: &mut dyn ScoreEndpoint,
    cache: &mut ScoreCache,
    scale: Option<ScaleDescriptor>,
    fold_case: bool,
) -> Result<QadReport, AuditError> {
    let info = scorer.info().clone();
    let scale = scale.unwrap_or(info.scale);
    let mut requests = Vec::new();
    for rec in &records {
        let source = rec.source.as_deref().filter(|s| !s.trim().is_empty()).ok_or_else(|| {
            AuditError::Inputs(ScoringError::EmptyRequestText { id: rec.instance_id.clone(), field: "source" })
        })?;
        for (k, cand) in rec.candidates.iter().enumerate() {
            requests.push(ScoreRequest::new(format!("{}#{k}", rec.instance_id), source, cand.as_str()));
        }
    }
    let scored = CachedScorer { endpoint: scorer, cache }.score(&requests, scale).map_err(AuditError::Scoring)?;
    let mut scores = scored.into_iter().map(|r| r.normalized);

    let mut choices = Vec::with_capacity(records.len());
    for rec in records {
        let own: Vec<f64> = scores.by_ref().take(rec.candidates.len()).collect();
        let set = rec.into_candidate_set(own)?;
        let (index, hypothesis) = rerank(&set)?;
        choices.push(QadChoice {
            instance_id: set.instance_id.clone(),
            index,
            hypothesis: hypothesis.to_string(),
            label: gender_match(hypothesis, &set.f_unique_words, &set.m_unique_words, fold_case),
        });
    }
    let labels: Vec<GenderMatchLabel> = choices.iter().map(|c| c.label).collect();
    Ok(QadReport { scorer: info.name, fold_case, delta: delta_m(&labels)?, choices })
}
