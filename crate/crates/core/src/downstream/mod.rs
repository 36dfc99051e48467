//! Downstream uses of a QE scorer: threshold filtering, the BLEU-banded counterfactual
//! filter, and quality-aware N-best reranking.

mod bleu;
mod gtfilter;
mod qad;
mod retention;
mod wilcoxon;

use thiserror::Error;

pub use bleu::{quality_band, sentence_bleu, QualityBand};
pub use gtfilter::{gt_filter, BandStats, FilterStats, GtPair, RetainedPair};
pub use qad::{
    delta_m, gender_match, rerank, unique_word_sets, CandidateSet, DeltaM, GenderMatchLabel,
    NbestRecord,
};
pub use retention::{retention_curve, threshold_grid, RetentionCurve};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonResult, EXACT_MAX_N};

#[derive(Debug, Error, PartialEq)]
pub enum DownstreamError {
    #[error("group {0} has no scores")]
    EmptyGroup(String),
    #[error("thresholds must be sorted ascending")]
    UnsortedThresholds,
    #[error("bad threshold grid `{0}` (expected start:stop:step)")]
    BadGrid(String),
    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("paired samples are empty")]
    EmptySample,
    #[error("candidate set `{0}` has no candidates")]
    NoCandidates(String),
    #[error("candidate set `{id}` has {candidates} candidates but {scores} scores")]
    ScoreCountMismatch { id: String, candidates: usize, scores: usize },
    #[error("δ_M over an empty label list")]
    NoLabels,
}
