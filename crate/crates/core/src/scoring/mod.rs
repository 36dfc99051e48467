//! Driving QE scorers and translators, and normalizing their output.
//!
//! A scorer is anything implementing [`ScoreEndpoint`]: an out-of-process adapter
//! speaking the line-delimited wire protocol ([`wire`]), or one of the deterministic
//! in-process mocks ([`mock`]). Raw scores are mapped onto `[0, 1]`, 1 being best,
//! by [`normalize_score`] using the scale the scorer declares.

pub mod cache;
pub mod endpoint;
pub mod mock;
pub mod translate;
pub mod wire;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{EvaluationInstance, VariantLabel};

pub use cache::{CachedScorer, ScoreCache};
pub use endpoint::{open_scorer, open_translator, parse_mock_translator, EndpointOptions, Exchange, Payload, RawResponse, ScoreEndpoint, ScorerInfo};
pub use mock::MockScorer;
pub use translate::{translate_batch, CachedTranslator, MapTranslator, TranslateEndpoint};

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("invalid scale: min {min} must be below max {max}")]
    InvalidScale { min: f64, max: f64 },
    #[error("duplicate request id `{0}` in batch")]
    DuplicateRequestId(String),
    #[error("empty {field} text in request `{id}`")]
    EmptyRequestText { id: String, field: &'static str },
    #[error("timed out waiting for responses to ids: {}", .0.join(", "))]
    Timeout(Vec<String>),
    #[error("endpoint closed without answering ids: {}", .0.join(", "))]
    MissingResponses(Vec<String>),
    #[error("response for unknown id `{0}`")]
    UnknownResponseId(String),
    #[error("duplicate response for id `{0}`")]
    DuplicateResponseId(String),
    #[error("non-numeric score for id `{id}`: {payload}")]
    NonNumericScore { id: String, payload: String },
    #[error("scorer reported an error for id `{id}`: {message}")]
    ScorerReported { id: String, message: String },
    #[error("instance `{0}` has no context but the strategy requires one")]
    MissingContext(String),
    #[error("instance `{id}` has no variant {label}")]
    UnknownVariant { id: String, label: VariantLabel },
    #[error("instance `{0}` has no language pair; translated context needs a target language")]
    MissingLanguagePair(String),
    #[error("strategy concat_translated_context needs a translator endpoint")]
    NoTranslator,
    #[error("translator failure: {0}")]
    Translator(String),
    #[error("translator returned no translation at position {0}")]
    EmptyTranslation(usize),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("bad endpoint spec `{spec}`: {reason}")]
    BadEndpoint { spec: String, reason: String },
    #[error("endpoint i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Raw score range and orientation of a scorer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleDescriptor {
    pub min: f64,
    pub max: f64,
    pub higher_is_better: bool,
}

impl ScaleDescriptor {
    /// MetricX-style error counts: 0 (no errors) to 25, lower is better.
    pub const METRICX: ScaleDescriptor = ScaleDescriptor { min: 0.0, max: 25.0, higher_is_better: false };
    /// Direct-assessment prompting: 0 to 100, higher is better.
    pub const GEMBA: ScaleDescriptor = ScaleDescriptor { min: 0.0, max: 100.0, higher_is_better: true };
    /// COMET-family scores: 0 to 1, higher is better.
    pub const UNIT: ScaleDescriptor = ScaleDescriptor { min: 0.0, max: 1.0, higher_is_better: true };

    pub fn new(min: f64, max: f64, higher_is_better: bool) -> Result<Self, ScoringError> {
        if !(min < max) || !min.is_finite() || !max.is_finite() {
            return Err(ScoringError::InvalidScale { min, max });
        }
        Ok(ScaleDescriptor { min, max, higher_is_better })
    }
}

impl fmt::Display for ScaleDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dir = if self.higher_is_better { "higher" } else { "lower" };
        write!(f, "{}:{}:{}", self.min, self.max, dir)
    }
}

/// Parses `min:max:dir` where `dir` is `higher` or `lower`.
impl FromStr for ScaleDescriptor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, dir] = parts.as_slice() else {
            return Err(format!("scale `{s}` is not min:max:dir"));
        };
        let min: f64 = min.parse().map_err(|_| format!("bad scale minimum `{min}`"))?;
        let max: f64 = max.parse().map_err(|_| format!("bad scale maximum `{max}`"))?;
        let higher = match *dir {
            "higher" | "up" | "true" => true,
            "lower" | "down" | "false" => false,
            other => return Err(format!("scale direction `{other}` is not higher|lower")),
        };
        ScaleDescriptor::new(min, max, higher).map_err(|e| e.to_string())
    }
}

/// Maps a raw score onto `[0, 1]` with 1 best. Out-of-range values are clamped.
pub fn normalize_score(raw: f64, scale: ScaleDescriptor) -> f64 {
    normalize_with_clamp(raw, scale).0
}

/// Like [`normalize_score`], also reporting whether `raw` fell outside the scale.
pub fn normalize_with_clamp(raw: f64, scale: ScaleDescriptor) -> (f64, bool) {
    let u = (raw - scale.min) / (scale.max - scale.min);
    let clamped = !(0.0..=1.0).contains(&u);
    let u = u.clamp(0.0, 1.0);
    (if scale.higher_is_better { u } else { 1.0 - u }, clamped)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub id: String,
    pub source_text: String,
    pub hypothesis_text: String,
    /// Only for reference-based scorers; QE scorers ignore it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_text: Option<String>,
}

impl ScoreRequest {
    pub fn new(
        id: impl Into<String>,
        source_text: impl Into<String>,
        hypothesis_text: impl Into<String>,
    ) -> Self {
        ScoreRequest {
            id: id.into(),
            source_text: source_text.into(),
            hypothesis_text: hypothesis_text.into(),
            reference_text: None,
        }
    }

    pub fn with_reference(mut self, reference: impl Into<String>) -> Self {
        self.reference_text = Some(reference.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub id: String,
    pub raw: f64,
    pub normalized: f64,
    /// The raw score was outside the declared scale and got clamped.
    #[serde(default)]
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// Score `(s, h)`.
    None,
    /// Score `(c ⊕ s, c ⊕ h)`.
    ConcatSourceContext,
    /// Score `(c ⊕ s, translate(c) ⊕ h)`.
    ConcatTranslatedContext,
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(StrategyKind::None),
            "ctx" | "concat_source_context" => Ok(StrategyKind::ConcatSourceContext),
            "ctx-translated" | "concat_translated_context" => {
                Ok(StrategyKind::ConcatTranslatedContext)
            }
            other => Err(format!("unknown strategy `{other}` (none, ctx, ctx-translated)")),
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyKind::None => "none",
            StrategyKind::ConcatSourceContext => "ctx",
            StrategyKind::ConcatTranslatedContext => "ctx-translated",
        })
    }
}

/// How preceding context enters the scorer input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextStrategy {
    pub kind: StrategyKind,
    pub separator: String,
}

impl ContextStrategy {
    pub fn new(kind: StrategyKind) -> Self {
        ContextStrategy { kind, separator: " ".to_string() }
    }

    pub fn with_separator(mut self, separator: impl Into<String>) -> Self {
        self.separator = separator.into();
        self
    }
}

impl Default for ContextStrategy {
    fn default() -> Self {
        ContextStrategy::new(StrategyKind::None)
    }
}

/// Request id for one `(instance, variant)` scoring unit.
pub fn request_id(instance: &EvaluationInstance, variant: VariantLabel) -> String {
    format!("{}#{}", instance.id, variant)
}

/// Builds the scorer input for one variant of an instance under a context strategy.
///
/// Translated context is looked up through `translator`, which caches per
/// `(text, target language)`; callers typically prefetch all contexts with one
/// [`translate_batch`] call first.
pub fn build_scored_inputs(
    instance: &EvaluationInstance,
    variant: VariantLabel,
    strategy: &ContextStrategy,
    translator: Option<&CachedTranslator>,
) -> Result<ScoreRequest, ScoringError> {
    let hypothesis = instance.variant(variant).ok_or_else(|| ScoringError::UnknownVariant {
        id: instance.id.clone(),
        label: variant,
    })?;
    let id = request_id(instance, variant);
    if strategy.kind == StrategyKind::None {
        return Ok(ScoreRequest::new(id, instance.source.as_str(), hypothesis));
    }
    let context = instance
        .context
        .as_deref()
        .filter(|c| !c.trim().is_empty())
        .ok_or_else(|| ScoringError::MissingContext(instance.id.clone()))?;
    let sep = &strategy.separator;
    let source = format!("{context}{sep}{}", instance.source);
    let hyp_context = match strategy.kind {
        StrategyKind::ConcatTranslatedContext => {
            let translator = translator.ok_or(ScoringError::NoTranslator)?;
            let target = instance
                .language_pair
                .as_ref()
                .ok_or_else(|| ScoringError::MissingLanguagePair(instance.id.clone()))?
                .target
                .clone();
            translator.translate_batch(&[context.to_string()], &target)?.remove(0)
        }
        _ => context.to_string(),
    };
    Ok(ScoreRequest::new(id, source, format!("{hyp_context}{sep}{hypothesis}")))
}

/// Scores a batch through `endpoint`, matching responses to requests by id.
///
/// Records come back in request order whatever order the endpoint answered in.
pub fn score_batch(
    endpoint: &mut dyn ScoreEndpoint,
    requests: &[ScoreRequest],
    scale: ScaleDescriptor,
) -> Result<Vec<ScoreRecord>, ScoringError> {
    let mut ids = HashSet::with_capacity(requests.len());
    for req in requests {
        if !ids.insert(req.id.as_str()) {
            return Err(ScoringError::DuplicateRequestId(req.id.clone()));
        }
        if req.source_text.is_empty() {
            return Err(ScoringError::EmptyRequestText { id: req.id.clone(), field: "source" });
        }
        if req.hypothesis_text.is_empty() {
            return Err(ScoringError::EmptyRequestText { id: req.id.clone(), field: "hypothesis" });
        }
    }
    if requests.is_empty() {
        return Ok(Vec::new());
    }

    let exchange = endpoint.exchange(requests)?;
    let mut raw: HashMap<String, f64> = HashMap::with_capacity(requests.len());
    for resp in exchange.responses {
        if !ids.contains(resp.id.as_str()) {
            return Err(ScoringError::UnknownResponseId(resp.id));
        }
        if raw.contains_key(&resp.id) {
            return Err(ScoringError::DuplicateResponseId(resp.id));
        }
        let value = match resp.payload {
            Payload::Score(v) => match v.as_f64().filter(|x| x.is_finite()) {
                Some(x) => x,
                None => {
                    return Err(ScoringError::NonNumericScore { id: resp.id, payload: v.to_string() })
                }
            },
            Payload::Error(message) => {
                return Err(ScoringError::ScorerReported { id: resp.id, message })
            }
        };
        raw.insert(resp.id, value);
    }

    let missing: Vec<String> =
        requests.iter().filter(|r| !raw.contains_key(&r.id)).map(|r| r.id.clone()).collect();
    if !missing.is_empty() {
        return Err(if exchange.timed_out {
            ScoringError::Timeout(missing)
        } else {
            ScoringError::MissingResponses(missing)
        });
    }

    Ok(requests
        .iter()
        .map(|r| {
            let value = raw[&r.id];
            let (normalized, clamped) = normalize_with_clamp(value, scale);
            ScoreRecord { id: r.id.clone(), raw: value, normalized, clamped }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::corpus::{Condition, LanguagePair};
    use proptest::prelude::*;

    #[test]
    fn metricx_rescale_endpoints() {
        assert_eq!(normalize_score(25.0, ScaleDescriptor::METRICX), 0.0);
        assert_eq!(normalize_score(0.0, ScaleDescriptor::METRICX), 1.0);
        assert_eq!(normalize_score(5.0, ScaleDescriptor::METRICX), 1.0 - 5.0 / 25.0);
    }

    #[test]
    fn gemba_linear() {
        assert!((normalize_score(85.0, ScaleDescriptor::GEMBA) - 0.85).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_is_clamped_and_flagged() {
        assert_eq!(normalize_with_clamp(-3.0, ScaleDescriptor::METRICX), (1.0, true));
        assert_eq!(normalize_with_clamp(130.0, ScaleDescriptor::GEMBA), (1.0, true));
        assert_eq!(normalize_with_clamp(50.0, ScaleDescriptor::GEMBA), (0.5, false));
    }

    #[test]
    fn scale_parsing() {
        assert_eq!("0:25:lower".parse::<ScaleDescriptor>().unwrap(), ScaleDescriptor::METRICX);
        assert!("1:1:higher".parse::<ScaleDescriptor>().is_err());
        assert!("0:1".parse::<ScaleDescriptor>().is_err());
        assert!("0:1:sideways".parse::<ScaleDescriptor>().is_err());
    }

    proptest! {
        #[test]
        fn normalize_is_monotone(a in -50.0f64..150.0, b in -50.0f64..150.0,
                                 min in -10.0f64..10.0, width in 0.1f64..100.0, up in any::<bool>()) {
            let scale = ScaleDescriptor::new(min, min + width, up).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (nl, nh) = (normalize_score(lo, scale), normalize_score(hi, scale));
            prop_assert!((0.0..=1.0).contains(&nl) && (0.0..=1.0).contains(&nh));
            if up { prop_assert!(nl <= nh) } else { prop_assert!(nl >= nh) }
            let best = if up { scale.max } else { scale.min };
            let worst = if up { scale.min } else { scale.max };
            prop_assert_eq!(normalize_score(best, scale), 1.0);
            prop_assert_eq!(normalize_score(worst, scale), 0.0);
        }
    }

    fn contextual() -> EvaluationInstance {
        EvaluationInstance {
            id: "t1".into(),
            language_pair: Some(LanguagePair::new("en", "it")),
            source: "They have worked as an academic.".into(),
            context: Some("Tymoshenko released her autobiography.".into()),
            condition: Condition::UnambiguousExtra,
            variants: BTreeMap::from([
                (VariantLabel::F, "Ha lavorato come accademica.".into()),
                (VariantLabel::M, "Ha lavorato come accademico.".into()),
            ]),
            correct_variant: Some(VariantLabel::F),
            source_group: Some(crate::corpus::Gender::F),
            metadata: BTreeMap::new(),
        }
    }

    #[test]
    fn concat_source_context() {
        let inst = contextual();
        let req = build_scored_inputs(
            &inst,
            VariantLabel::M,
            &ContextStrategy::new(StrategyKind::ConcatSourceContext),
            None,
        )
        .unwrap();
        assert_eq!(
            req.source_text,
            "Tymoshenko released her autobiography. They have worked as an academic."
        );
        assert_eq!(
            req.hypothesis_text,
            "Tymoshenko released her autobiography. Ha lavorato come accademico."
        );
        let nl = build_scored_inputs(
            &inst,
            VariantLabel::M,
            &ContextStrategy::new(StrategyKind::ConcatSourceContext).with_separator("\n"),
            None,
        )
        .unwrap();
        assert!(nl.source_text.starts_with("Tymoshenko released her autobiography.\nThey"));
    }

    #[test]
    fn none_strategy_is_identity() {
        let inst = contextual();
        let req =
            build_scored_inputs(&inst, VariantLabel::F, &ContextStrategy::default(), None).unwrap();
        assert_eq!(req.source_text, inst.source);
        assert_eq!(req.hypothesis_text, inst.variants[&VariantLabel::F]);
        assert_eq!(req.id, "t1#F");
    }

    #[test]
    fn translated_context_uses_translator() {
        let inst = contextual();
        let translator = CachedTranslator::new(Box::new(translate::MapTranslator::constant("CTX")));
        let req = build_scored_inputs(
            &inst,
            VariantLabel::F,
            &ContextStrategy::new(StrategyKind::ConcatTranslatedContext),
            Some(&translator),
        )
        .unwrap();
        assert_eq!(req.hypothesis_text, "CTX Ha lavorato come accademica.");
        assert!(req.source_text.starts_with("Tymoshenko released"));
    }

    #[test]
    fn context_strategy_errors() {
        let mut inst = contextual();
        let translated = ContextStrategy::new(StrategyKind::ConcatTranslatedContext);
        assert!(matches!(
            build_scored_inputs(&inst, VariantLabel::F, &translated, None),
            Err(ScoringError::NoTranslator)
        ));
        inst.context = None;
        assert!(matches!(
            build_scored_inputs(&inst, VariantLabel::F, &ContextStrategy::new(StrategyKind::ConcatSourceContext), None),
            Err(ScoringError::MissingContext(_))
        ));
        assert!(matches!(
            build_scored_inputs(&inst, VariantLabel::N, &ContextStrategy::default(), None),
            Err(ScoringError::UnknownVariant { .. })
        ));
    }

    #[test]
    fn translator_failure_carries_diagnostic() {
        let inst = contextual();
        let translator = CachedTranslator::new(Box::new(translate::MapTranslator::failing("model OOM")));
        let err = build_scored_inputs(
            &inst,
            VariantLabel::F,
            &ContextStrategy::new(StrategyKind::ConcatTranslatedContext),
            Some(&translator),
        )
        .unwrap_err();
        assert!(err.to_string().contains("model OOM"), "{err}");
    }

    /// Endpoint that replays a fixed set of responses.
    struct Scripted(Vec<RawResponse>, bool);

    impl ScoreEndpoint for Scripted {
        fn info(&self) -> &ScorerInfo {
            static INFO: std::sync::OnceLock<ScorerInfo> = std::sync::OnceLock::new();
            INFO.get_or_init(|| ScorerInfo { name: "scripted".into(), scale: ScaleDescriptor::UNIT })
        }
        fn exchange(&mut self, _: &[ScoreRequest]) -> Result<Exchange, ScoringError> {
            Ok(Exchange { responses: self.0.clone(), timed_out: self.1 })
        }
    }

    fn reqs(n: usize) -> Vec<ScoreRequest> {
        (0..n).map(|i| ScoreRequest::new(format!("r{i}"), "src", format!("hyp {i}"))).collect()
    }

    fn score(id: &str, v: serde_json::Value) -> RawResponse {
        RawResponse { id: id.into(), payload: Payload::Score(v) }
    }

    #[test]
    fn constant_mock_batch() {
        let mut ep = MockScorer::Constant(0.5).endpoint();
        let recs = score_batch(&mut ep, &reqs(3), ScaleDescriptor::UNIT).unwrap();
        assert_eq!(recs.len(), 3);
        assert!(recs.iter().all(|r| r.normalized == 0.5));
    }

    #[test]
    fn reverse_order_is_matched_by_id() {
        let mut ep = Scripted(
            vec![score("r2", 0.2.into()), score("r1", 0.1.into()), score("r0", 0.0.into())],
            false,
        );
        let recs = score_batch(&mut ep, &reqs(3), ScaleDescriptor::UNIT).unwrap();
        let got: Vec<(String, f64)> = recs.into_iter().map(|r| (r.id, r.raw)).collect();
        assert_eq!(got, vec![("r0".into(), 0.0), ("r1".into(), 0.1), ("r2".into(), 0.2)]);
    }

    #[test]
    fn protocol_violations() {
        let mut unknown = Scripted(vec![score("zzz", 0.5.into())], false);
        assert!(matches!(
            score_batch(&mut unknown, &reqs(1), ScaleDescriptor::UNIT),
            Err(ScoringError::UnknownResponseId(id)) if id == "zzz"
        ));
        let mut dup = Scripted(vec![score("r0", 0.5.into()), score("r0", 0.4.into())], false);
        assert!(matches!(
            score_batch(&mut dup, &reqs(1), ScaleDescriptor::UNIT),
            Err(ScoringError::DuplicateResponseId(_))
        ));
        let mut text = Scripted(vec![score("r0", "high".into())], false);
        assert!(matches!(
            score_batch(&mut text, &reqs(1), ScaleDescriptor::UNIT),
            Err(ScoringError::NonNumericScore { id, .. }) if id == "r0"
        ));
        let mut slow = Scripted(vec![score("r0", 0.5.into())], true);
        match score_batch(&mut slow, &reqs(2), ScaleDescriptor::UNIT) {
            Err(ScoringError::Timeout(ids)) => assert_eq!(ids, vec!["r1".to_string()]),
            other => panic!("expected timeout, got {other:?}"),
        }
        let dup_req = vec![ScoreRequest::new("a", "s", "h"), ScoreRequest::new("a", "s", "h2")];
        assert!(matches!(
            score_batch(&mut MockScorer::Constant(0.5).endpoint(), &dup_req, ScaleDescriptor::UNIT),
            Err(ScoringError::DuplicateRequestId(_))
        ));
    }

    #[test]
    fn hash_mock_ignores_context_under_none_strategy() {
        let mut a = contextual();
        let mut b = contextual();
        a.context = Some("She wrote a book.".into());
        b.context = Some("He wrote a book.".into());
        let ra = build_scored_inputs(&a, VariantLabel::F, &ContextStrategy::default(), None).unwrap();
        let rb = build_scored_inputs(&b, VariantLabel::F, &ContextStrategy::default(), None).unwrap();
        let mut ep = MockScorer::Hash.endpoint();
        let sa = score_batch(&mut ep, &[ra], ScaleDescriptor::UNIT).unwrap();
        let sb = score_batch(&mut ep, &[rb], ScaleDescriptor::UNIT).unwrap();
        assert_eq!(sa[0].raw, sb[0].raw);
    }

    proptest! {
        #[test]
        fn batch_scoring_is_permutation_equivariant(seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let requests = reqs(12);
            let mut shuffled = requests.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let mut ep = MockScorer::Hash.endpoint();
            let a = score_batch(&mut ep, &requests, ScaleDescriptor::UNIT).unwrap();
            let b = score_batch(&mut ep, &shuffled, ScaleDescriptor::UNIT).unwrap();
            for rec in &b {
                let orig = a.iter().find(|r| r.id == rec.id).unwrap();
                prop_assert_eq!(orig, rec);
            }
        }
    }
}
