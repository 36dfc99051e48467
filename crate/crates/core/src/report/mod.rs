//! End-to-end audit runs and the report they produce.
//!
//! An audit loads a corpus, builds scorer inputs under a context strategy, scores every
//! `(instance, variant)` pair through the score cache, and reduces the scores into one
//! [`BiasSummary`] per `(language pair, condition)` cell. Cells are assembled in a fixed
//! order, so equal inputs and a deterministic scorer give byte-identical reports apart
//! from the timestamp.

mod emit;
mod nbest;
mod pareto;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::biasstats::{judge_instance, score_ratio, Alternative, BiasSummary, PhiValue, DEFAULT_RESAMPLES};
use crate::corpus::{load_dataset_with_report, Condition, CorpusError, Diagnostic, EvaluationInstance, Gender, Schema};
use crate::downstream::{retention_curve, DeltaM, DownstreamError, RetentionCurve};
use crate::scoring::{
    build_scored_inputs, open_scorer, EndpointOptions, open_translator, request_id, CachedScorer, CachedTranslator,
    ContextStrategy, ScaleDescriptor, ScoreCache, ScoreEndpoint, ScoringError, StrategyKind,
};

pub use emit::{emit, gt_filter_markdown, Format};
pub use nbest::{run_qad, QadChoice, QadReport};
pub use pareto::{bias_gap, pareto_candidates, pareto_points, ParetoPoint};

/// Null value of the ratio t-test: equal scores for both forms.
pub const RATIO_NULL: f64 = 1.0;

/// Failure of an audit run, named by the stage that failed.
#[derive(Debug, Error)]
pub enum AuditError {
    #[error("loading corpus: {0}")]
    Corpus(#[from] CorpusError),
    #[error("no instances left after filtering by condition")]
    NoInstances,
    #[error("opening endpoint: {0}")]
    Endpoint(ScoringError),
    #[error("building scorer inputs: {0}")]
    Inputs(ScoringError),
    #[error("translating context: {0}")]
    Translation(ScoringError),
    #[error("scoring: {0}")]
    Scoring(ScoringError),
    #[error("score cache: {0}")]
    Cache(io::Error),
    #[error("downstream analysis: {0}")]
    Downstream(#[from] DownstreamError),
}

impl AuditError {
    /// True when the failure came from talking to a scorer or translator rather than
    /// from the inputs.
    pub fn is_endpoint_failure(&self) -> bool {
        match self {
            AuditError::Endpoint(_) | AuditError::Translation(_) => true,
            AuditError::Scoring(e) => !matches!(
                e,
                ScoringError::DuplicateRequestId(_) | ScoringError::EmptyRequestText { .. }
            ),
            _ => false,
        }
    }
}

/// Everything an audit run needs.
#[derive(Debug, Clone)]
pub struct AuditConfig {
    pub dataset: PathBuf,
    pub schema: Schema,
    /// Conditions to audit; empty means every condition present in the corpus.
    pub conditions: Vec<Condition>,
    /// Scorer endpoint spec, e.g. `mock:hash` or `cmd:python adapter.py`.
    pub scorer: String,
    /// Overrides the scale the scorer declares in its handshake.
    pub scale: Option<ScaleDescriptor>,
    pub strategy: ContextStrategy,
    /// Translator endpoint spec, needed by the translated-context strategy.
    pub translator: Option<String>,
    pub resamples: usize,
    pub seed: u64,
    pub alternative: Alternative,
    pub endpoint: EndpointOptions,
    /// When set, a retention curve over these thresholds is computed from the
    /// feminine and masculine scores of ambiguous instances.
    pub retention_grid: Option<Vec<f64>>,
}

impl AuditConfig {
    pub fn new(dataset: impl Into<PathBuf>, schema: Schema, scorer: impl Into<String>) -> Self {
        AuditConfig {
            dataset: dataset.into(),
            schema,
            conditions: Vec::new(),
            scorer: scorer.into(),
            scale: None,
            strategy: ContextStrategy::default(),
            translator: None,
            resamples: DEFAULT_RESAMPLES,
            seed: 42,
            alternative: Alternative::TwoSided,
            endpoint: EndpointOptions::default(),
            retention_grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditMetadata {
    pub scorer: String,
    pub scale: ScaleDescriptor,
    pub dataset: String,
    pub schema: String,
    pub strategy: StrategyKind,
    pub separator: String,
    pub seed: u64,
    pub resamples: usize,
    pub alternative: Alternative,
    pub ratio_null: f64,
    /// RFC 3339 time of the run; the only field allowed to differ between reruns.
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditCell {
    /// `None` when the corpus carries no language pair.
    pub language_pair: Option<String>,
    pub condition: Condition,
    pub summary: BiasSummary,
}

/// Unweighted mean of per-language cells for one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossLanguageMean {
    pub condition: Condition,
    /// Languages whose cells entered the ER, tie-rate and ratio means.
    pub languages: Vec<String>,
    pub er_total: Option<f64>,
    pub er_f: Option<f64>,
    pub er_m: Option<f64>,
    pub tie_rate: Option<f64>,
    pub ratio_mean: Option<f64>,
    /// Mean of the finite Φ values only.
    pub phi: Option<f64>,
    /// Languages whose Φ was finite and entered `phi`.
    pub phi_languages: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunCounts {
    pub instances: usize,
    pub requests: usize,
    /// Raw scores outside the declared scale, clamped before use.
    pub clamped: usize,
    pub cache_hits: usize,
    pub scorer_calls: usize,
    /// Ratios dropped because the denominator score was zero.
    pub excluded_zero_denominator: usize,
    /// Corpus pairs flagged as not minimal-edit while loading.
    pub diagnostics: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub metadata: AuditMetadata,
    pub cells: Vec<AuditCell>,
    pub cross_language: Vec<CrossLanguageMean>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retention: Option<RetentionCurve>,
    /// Attached by callers that also reranked N-best lists with the same scorer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qad: Option<DeltaM>,
    pub counts: RunCounts,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
}

impl AuditReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// The report with its timestamp blanked, for comparing reruns.
    pub fn without_timestamp(&self) -> Self {
        let mut r = self.clone();
        r.metadata.timestamp.clear();
        r
    }
}

/// Loads the dataset, opens the configured endpoints and the score cache named by
/// the environment, and runs the audit.
pub fn run_audit(config: &AuditConfig) -> Result<AuditReport, AuditError> {
    let loaded = load_dataset_with_report(&config.dataset, config.schema)?;
    let mut scorer = open_scorer(&config.scorer, config.endpoint).map_err(AuditError::Endpoint)?;
    let translator = match &config.translator {
        Some(spec) => Some(CachedTranslator::new(
            open_translator(spec, config.endpoint).map_err(AuditError::Endpoint)?,
        )),
        None => None,
    };
    let mut cache = ScoreCache::from_env().map_err(AuditError::Cache)?;
    let mut report = audit_instances(config, &loaded.instances, scorer.as_mut(), translator.as_ref(), &mut cache)?;
    report.counts.diagnostics = loaded.diagnostics.len();
    report.diagnostics = loaded.diagnostics;
    Ok(report)
}

/// Runs the audit over already-loaded instances with caller-supplied endpoints.
pub fn audit_instances(
    config: &AuditConfig,
    instances: &[EvaluationInstance],
    scorer: &mut dyn ScoreEndpoint,
    translator: Option<&CachedTranslator>,
    cache: &mut ScoreCache,
) -> Result<AuditReport, AuditError> {
    let selected: Vec<&EvaluationInstance> = instances
        .iter()
        .filter(|i| config.conditions.is_empty() || config.conditions.contains(&i.condition))
        .collect();
    if selected.is_empty() {
        return Err(AuditError::NoInstances);
    }

    if config.strategy.kind == StrategyKind::ConcatTranslatedContext {
        prefetch_translations(&selected, translator)?;
    }
    let mut requests = Vec::with_capacity(selected.len() * 2);
    for inst in &selected {
        for label in inst.condition.labels() {
            requests.push(build_scored_inputs(inst, label, &config.strategy, translator).map_err(AuditError::Inputs)?);
        }
    }

    let info = scorer.info().clone();
    let scale = config.scale.unwrap_or(info.scale);
    let hits_before = cache.hits();
    let misses_before = cache.misses();
    let records = CachedScorer { endpoint: scorer, cache }.score(&requests, scale).map_err(AuditError::Scoring)?;
    let score: HashMap<&str, f64> = records.iter().map(|r| (r.id.as_str(), r.normalized)).collect();
    let score_of = |inst: &EvaluationInstance, label| score[request_id(inst, label).as_str()];

    let mut groups: BTreeMap<(Option<String>, Condition), Vec<&EvaluationInstance>> = BTreeMap::new();
    for inst in &selected {
        let lang = inst.language_pair.as_ref().map(|l| l.to_string());
        groups.entry((lang, inst.condition)).or_default().push(inst);
    }

    let mut excluded = 0;
    let mut cells = Vec::with_capacity(groups.len());
    for ((language_pair, condition), members) in groups {
        let summary = if condition.is_unambiguous() {
            let judgments: Vec<(Gender, _)> = members
                .iter()
                .map(|inst| {
                    let correct = inst.correct_variant.expect("validated unambiguous instance");
                    let incorrect = inst.incorrect_variant().expect("validated unambiguous instance");
                    let group = inst.source_group.expect("validated unambiguous instance");
                    (group, judge_instance(score_of(inst, correct), score_of(inst, incorrect)))
                })
                .collect();
            BiasSummary::from_judgments(&judgments, config.resamples, config.seed, config.alternative)
        } else {
            let [num, den] = condition.labels();
            let ratios: Vec<Option<f64>> =
                members.iter().map(|inst| score_ratio(score_of(inst, num), score_of(inst, den))).collect();
            let s = BiasSummary::from_ratios(&ratios, RATIO_NULL);
            excluded += s.ratio.as_ref().map_or(0, |r| r.n_excluded_zero_denominator);
            s
        };
        cells.push(AuditCell { language_pair, condition, summary });
    }

    let retention = match &config.retention_grid {
        Some(grid) => {
            let mut by_group: BTreeMap<Gender, Vec<f64>> = BTreeMap::new();
            for inst in selected.iter().filter(|i| i.condition == Condition::AmbiguousFm) {
                for g in [Gender::F, Gender::M] {
                    by_group.entry(g).or_default().push(score_of(inst, g.variant()));
                }
            }
            Some(retention_curve(&by_group, grid)?)
        }
        None => None,
    };

    Ok(AuditReport {
        metadata: AuditMetadata {
            scorer: info.name,
            scale,
            dataset: config.dataset.display().to_string(),
            schema: config.schema.as_str().to_string(),
            strategy: config.strategy.kind,
            separator: config.strategy.separator.clone(),
            seed: config.seed,
            resamples: config.resamples,
            alternative: config.alternative,
            ratio_null: RATIO_NULL,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        },
        cross_language: cross_language_means(&cells),
        cells,
        retention,
        qad: None,
        counts: RunCounts {
            instances: selected.len(),
            requests: requests.len(),
            clamped: records.iter().filter(|r| r.clamped).count(),
            cache_hits: cache.hits() - hits_before,
            scorer_calls: cache.misses() - misses_before,
            excluded_zero_denominator: excluded,
            diagnostics: 0,
        },
        diagnostics: Vec::new(),
    })
}

/// Translates every distinct context once per target language, so input building
/// afterwards only reads the translation cache.
fn prefetch_translations(
    selected: &[&EvaluationInstance],
    translator: Option<&CachedTranslator>,
) -> Result<(), AuditError> {
    let translator = translator.ok_or(AuditError::Inputs(ScoringError::NoTranslator))?;
    let mut by_target: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for inst in selected {
        let (Some(lp), Some(ctx)) = (&inst.language_pair, &inst.context) else { continue };
        if !ctx.trim().is_empty() {
            by_target.entry(lp.target.clone()).or_default().insert(ctx.clone());
        }
    }
    for (target, texts) in by_target {
        let texts: Vec<String> = texts.into_iter().collect();
        translator.translate_batch(&texts, &target).map_err(AuditError::Translation)?;
    }
    Ok(())
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Unweighted per-condition means over cells that carry a language pair.
pub fn cross_language_means(cells: &[AuditCell]) -> Vec<CrossLanguageMean> {
    let mut out = Vec::new();
    for condition in Condition::ALL {
        let members: Vec<(&str, &BiasSummary)> = cells
            .iter()
            .filter(|c| c.condition == condition)
            .filter_map(|c| c.language_pair.as_deref().map(|l| (l, &c.summary)))
            .collect();
        if members.is_empty() {
            continue;
        }
        let collect = |f: &dyn Fn(&BiasSummary) -> Option<f64>| -> Vec<f64> {
            members.iter().filter_map(|(_, s)| f(s)).collect()
        };
        let finite_phi: Vec<(&str, f64)> = members
            .iter()
            .filter_map(|(l, s)| match s.phi {
                Some(PhiValue::Finite(v)) => Some((*l, v)),
                _ => None,
            })
            .collect();
        out.push(CrossLanguageMean {
            condition,
            languages: members.iter().map(|(l, _)| l.to_string()).collect(),
            er_total: mean(&collect(&|s| s.er_total)),
            er_f: mean(&collect(&|s| s.er_f)),
            er_m: mean(&collect(&|s| s.er_m)),
            tie_rate: mean(&collect(&|s| s.tie_rate)),
            ratio_mean: mean(&collect(&|s| s.ratio.as_ref().and_then(|r| r.mean))),
            phi: mean(&finite_phi.iter().map(|(_, v)| *v).collect::<Vec<_>>()),
            phi_languages: finite_phi.iter().map(|(l, _)| l.to_string()).collect(),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LanguagePair, VariantLabel};
    use crate::scoring::MockScorer;

    pub(crate) fn ambiguous(id: &str, lang: &str) -> EvaluationInstance {
        let (s, t) = lang.split_once('-').unwrap();
        EvaluationInstance {
            id: id.into(),
            language_pair: Some(LanguagePair::new(s, t)),
            source: format!("The doctor {id} arrived."),
            context: Some("It was late.".into()),
            condition: Condition::AmbiguousFm,
            variants: BTreeMap::from([
                (VariantLabel::F, format!("La dottoressa {id} è arrivata.")),
                (VariantLabel::M, format!("Il dottore {id} è arrivato.")),
            ]),
            correct_variant: None,
            source_group: None,
            metadata: BTreeMap::new(),
        }
    }

    pub(crate) fn unambiguous(id: &str, group: Gender) -> EvaluationInstance {
        let mut inst = ambiguous(id, "en-it");
        inst.condition = Condition::UnambiguousIntra;
        inst.correct_variant = Some(group.variant());
        inst.source_group = Some(group);
        inst
    }

    fn audit(instances: &[EvaluationInstance], mock: MockScorer) -> AuditReport {
        let config = AuditConfig::new("fixture", Schema::Native, mock.name());
        let mut endpoint = mock.endpoint();
        audit_instances(&config, instances, &mut endpoint, None, &mut ScoreCache::in_memory()).unwrap()
    }

    #[test]
    fn constant_scorer_gives_unit_ratios() {
        let insts: Vec<_> = (0..10).map(|i| ambiguous(&format!("a{i}"), "en-it")).collect();
        let report = audit(&insts, MockScorer::Constant(0.7));
        assert_eq!(report.cells.len(), 1);
        let ratio = report.cells[0].summary.ratio.clone().unwrap();
        assert_eq!(ratio.mean, Some(1.0));
        assert_eq!(ratio.t_p_value, Some(1.0));
        assert_eq!(report.counts.requests, 20);
    }

    #[test]
    fn feminine_penalty_makes_phi_infinite() {
        let insts: Vec<_> = (0..12)
            .map(|i| unambiguous(&format!("u{i}"), if i % 2 == 0 { Gender::F } else { Gender::M }))
            .collect();
        let mock = MockScorer::Biased { base: 0.8, penalty: 0.1, markers: vec!["dottoressa".into()] };
        let s = &audit(&insts, mock).cells[0].summary;
        assert_eq!(s.er_f, Some(1.0));
        assert_eq!(s.er_m, Some(0.0));
        assert_eq!(s.phi, Some(PhiValue::UndefinedInfinite));
    }

    #[test]
    fn cells_are_keyed_by_language_and_condition() {
        let mut insts: Vec<_> = (0..4).map(|i| ambiguous(&format!("a{i}"), "en-it")).collect();
        insts.extend((0..4).map(|i| ambiguous(&format!("b{i}"), "en-de")));
        insts.extend((0..4).map(|i| unambiguous(&format!("c{i}"), if i < 2 { Gender::F } else { Gender::M })));
        let report = audit(&insts, MockScorer::Hash);
        let keys: Vec<_> = report.cells.iter().map(|c| (c.language_pair.clone().unwrap(), c.condition)).collect();
        assert_eq!(
            keys,
            vec![
                ("en-de".to_string(), Condition::AmbiguousFm),
                ("en-it".to_string(), Condition::AmbiguousFm),
                ("en-it".to_string(), Condition::UnambiguousIntra),
            ]
        );
        let fm_mean = &report.cross_language[0];
        assert_eq!(fm_mean.languages, vec!["en-de", "en-it"]);
        let means: Vec<f64> = report.cells[..2].iter().map(|c| c.summary.ratio.as_ref().unwrap().mean.unwrap()).collect();
        assert_eq!(fm_mean.ratio_mean, Some((means[0] + means[1]) / 2.0));
    }

    #[test]
    fn reruns_match_apart_from_timestamp() {
        let insts: Vec<_> = (0..30)
            .map(|i| unambiguous(&format!("u{i}"), if i % 3 == 0 { Gender::F } else { Gender::M }))
            .collect();
        let a = audit(&insts, MockScorer::Hash);
        let b = audit(&insts, MockScorer::Hash);
        assert_eq!(a.without_timestamp().to_json(), b.without_timestamp().to_json());
    }

    #[test]
    fn second_pass_hits_the_cache() {
        let insts: Vec<_> = (0..5).map(|i| ambiguous(&format!("a{i}"), "en-it")).collect();
        let config = AuditConfig::new("fixture", Schema::Native, "mock:hash");
        let mut endpoint = MockScorer::Hash.endpoint();
        let mut cache = ScoreCache::in_memory();
        let first = audit_instances(&config, &insts, &mut endpoint, None, &mut cache).unwrap();
        let second = audit_instances(&config, &insts, &mut endpoint, None, &mut cache).unwrap();
        assert_eq!((first.counts.scorer_calls, first.counts.cache_hits), (10, 0));
        assert_eq!((second.counts.scorer_calls, second.counts.cache_hits), (0, 10));
        assert_eq!(first.cells, second.cells);
    }

    #[test]
    fn retention_uses_ambiguous_scores() {
        let insts: Vec<_> = (0..20).map(|i| ambiguous(&format!("a{i}"), "en-it")).collect();
        let mut config = AuditConfig::new("fixture", Schema::Native, "mock:biased");
        config.retention_grid = Some(vec![0.0, 0.5, 0.77, 0.9]);
        let mock = MockScorer::Biased { base: 0.8, penalty: 0.05, markers: vec!["dottoressa".into()] };
        let mut endpoint = mock.endpoint();
        let report = audit_instances(&config, &insts, &mut endpoint, None, &mut ScoreCache::in_memory()).unwrap();
        assert_eq!(report.retention.unwrap().gap, vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn missing_translator_is_an_input_error() {
        let insts = vec![ambiguous("a", "en-it")];
        let mut config = AuditConfig::new("fixture", Schema::Native, "mock:hash");
        config.strategy = ContextStrategy::new(StrategyKind::ConcatTranslatedContext);
        let mut endpoint = MockScorer::Hash.endpoint();
        let err = audit_instances(&config, &insts, &mut endpoint, None, &mut ScoreCache::in_memory()).unwrap_err();
        assert!(matches!(err, AuditError::Inputs(ScoringError::NoTranslator)));
        assert!(!err.is_endpoint_failure());
    }

    #[test]
    fn condition_filter_can_empty_the_run() {
        let insts = vec![ambiguous("a", "en-it")];
        let mut config = AuditConfig::new("fixture", Schema::Native, "mock:hash");
        config.conditions = vec![Condition::UnambiguousExtra];
        let mut endpoint = MockScorer::Hash.endpoint();
        let err = audit_instances(&config, &insts, &mut endpoint, None, &mut ScoreCache::in_memory()).unwrap_err();
        assert!(matches!(err, AuditError::NoInstances));
    }
}
