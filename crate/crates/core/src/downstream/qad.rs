//! Quality-aware decoding: pick the best-scored N-best hypothesis and account for
//! which gender its wording matches.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::DownstreamError;
use crate::tokenize::{tokenize, tokenize_folded};

/// One line of an N-best input file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbestRecord {
    pub instance_id: String,
    /// Source text, needed to score candidates with a QE scorer.
    #[serde(default)]
    pub source: Option<String>,
    pub candidates: Vec<String>,
    pub h_f: String,
    pub h_m: String,
    /// Annotated gender-marked words; take precedence over `h_f`/`h_m` set difference.
    #[serde(default)]
    pub f_unique: Option<Vec<String>>,
    #[serde(default)]
    pub m_unique: Option<Vec<String>>,
}

impl NbestRecord {
    /// Unique-word sets from annotations when present, else from the references.
    pub fn unique_words(&self) -> (BTreeSet<String>, BTreeSet<String>) {
        match (&self.f_unique, &self.m_unique) {
            (Some(f), Some(m)) => (f.iter().cloned().collect(), m.iter().cloned().collect()),
            _ => unique_word_sets(&self.h_f, &self.h_m),
        }
    }

    pub fn into_candidate_set(self, scores: Vec<f64>) -> Result<CandidateSet, DownstreamError> {
        let (f, m) = self.unique_words();
        CandidateSet::new(self.instance_id, self.candidates, scores, f, m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub instance_id: String,
    pub candidates: Vec<String>,
    pub scores: Vec<f64>,
    pub f_unique_words: BTreeSet<String>,
    pub m_unique_words: BTreeSet<String>,
}

impl CandidateSet {
    pub fn new(
        instance_id: String,
        candidates: Vec<String>,
        scores: Vec<f64>,
        f_unique_words: BTreeSet<String>,
        m_unique_words: BTreeSet<String>,
    ) -> Result<Self, DownstreamError> {
        if candidates.len() != scores.len() {
            return Err(DownstreamError::ScoreCountMismatch {
                id: instance_id,
                candidates: candidates.len(),
                scores: scores.len(),
            });
        }
        // a word in both sets cannot discriminate; keep the sets disjoint
        let shared: BTreeSet<String> = f_unique_words.intersection(&m_unique_words).cloned().collect();
        let f_unique_words = f_unique_words.difference(&shared).cloned().collect();
        let m_unique_words = m_unique_words.difference(&shared).cloned().collect();
        Ok(CandidateSet { instance_id, candidates, scores, f_unique_words, m_unique_words })
    }
}

/// Index and text of the highest-scored candidate; ties go to the lowest index.
pub fn rerank(set: &CandidateSet) -> Result<(usize, &str), DownstreamError> {
    if set.candidates.is_empty() {
        return Err(DownstreamError::NoCandidates(set.instance_id.clone()));
    }
    let mut best = 0;
    for (i, s) in set.scores.iter().enumerate().skip(1) {
        if *s > set.scores[best] {
            best = i;
        }
    }
    Ok((best, set.candidates[best].as_str()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenderMatchLabel {
    F,
    M,
    Both,
    None,
}

impl GenderMatchLabel {
    pub fn swapped(self) -> Self {
        match self {
            GenderMatchLabel::F => GenderMatchLabel::M,
            GenderMatchLabel::M => GenderMatchLabel::F,
            other => other,
        }
    }
}

/// Which gender's unique words appear among the hypothesis tokens.
pub fn gender_match(
    hypothesis: &str,
    f_unique: &BTreeSet<String>,
    m_unique: &BTreeSet<String>,
    fold_case: bool,
) -> GenderMatchLabel {
    let tokens: BTreeSet<String> = if fold_case {
        tokenize_folded(hypothesis).into_iter().collect()
    } else {
        tokenize(hypothesis).into_iter().map(str::to_string).collect()
    };
    let hit = |set: &BTreeSet<String>| {
        set.iter().any(|w| if fold_case { tokens.contains(&w.to_lowercase()) } else { tokens.contains(w) })
    };
    match (hit(f_unique), hit(m_unique)) {
        (true, true) => GenderMatchLabel::Both,
        (true, false) => GenderMatchLabel::F,
        (false, true) => GenderMatchLabel::M,
        (false, false) => GenderMatchLabel::None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaM {
    /// `100 · (count_F − count_M) / n`, in percentage points.
    pub delta_pp: f64,
    pub count_f: usize,
    pub count_m: usize,
    pub count_both: usize,
    pub count_none: usize,
    pub n: usize,
}

/// Gender-representation gap of a set of outputs; 0 is parity, negative leans masculine.
pub fn delta_m(labels: &[GenderMatchLabel]) -> Result<DeltaM, DownstreamError> {
    if labels.is_empty() {
        return Err(DownstreamError::NoLabels);
    }
    let count = |l: GenderMatchLabel| labels.iter().filter(|x| **x == l).count();
    let (count_f, count_m) = (count(GenderMatchLabel::F), count(GenderMatchLabel::M));
    Ok(DeltaM {
        delta_pp: 100.0 * (count_f as f64 - count_m as f64) / labels.len() as f64,
        count_f,
        count_m,
        count_both: count(GenderMatchLabel::Both),
        count_none: count(GenderMatchLabel::None),
        n: labels.len(),
    })
}

/// Words found only in the feminine reference, and only in the masculine one.
pub fn unique_word_sets(h_f: &str, h_m: &str) -> (BTreeSet<String>, BTreeSet<String>) {
    let f: BTreeSet<&str> = tokenize(h_f).into_iter().collect();
    let m: BTreeSet<&str> = tokenize(h_m).into_iter().collect();
    (
        f.difference(&m).map(|s| s.to_string()).collect(),
        m.difference(&f).map(|s| s.to_string()).collect(),
    )
}
