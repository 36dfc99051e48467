//! Gender-bias auditing for machine-translation quality-estimation (QE) scorers.
//!
//! The harness treats a QE scorer as an opaque function `f(source, hypothesis) -> score`
//! reached over a line-delimited wire protocol (or one of the built-in mocks), and
//! measures how that scorer treats minimal-edit contrastive translations that differ
//! only in gender-marked words.
//!
//! Modules follow the data flow of an audit:
//!
//! - [`corpus`]: load and validate contrastive datasets into [`corpus::EvaluationInstance`]s.
//! - [`scoring`]: build scorer inputs for each context strategy, drive scorer and
//!   translator endpoints, normalize raw scores onto `[0, 1]`.
//! - [`biasstats`]: score ratios with t-tests, error rates with ties counted as errors,
//!   the `Φ = ER_F / ER_M` disparity ratio with a seeded bootstrap test, tie rates.
//! - [`downstream`]: threshold filtering (retention curves), the BLEU-banded
//!   counterfactual filter with Wilcoxon checks, and N-best reranking with the
//!   `δ_M` gender-representation gap.
//! - [`report`]: end-to-end audit runs, Pareto gap data and table emitters.
//!
//! See `examples/` for one runnable walkthrough per capability.

pub mod biasstats;
pub mod corpus;
pub mod downstream;
pub mod report;
pub mod scoring;
pub mod tokenize;

pub use corpus::{Condition, EvaluationInstance, VariantLabel};
pub use scoring::{ScaleDescriptor, ScoreRecord, ScoreRequest};
