//! Contrastive datasets: the instance model, loaders and minimal-edit validation.
//!
//! Every supported corpus layout is mapped onto [`EvaluationInstance`], which covers the
//! three experimental conditions: ambiguous feminine/masculine, ambiguous
//! gendered/neutral, and unambiguous (intra- or extra-sentential cue).

mod edit;
mod load;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use edit::{validate_minimal_edit, EditDiff};
pub use load::{
    load_dataset, load_dataset_with_report, read_dataset, write_native, CorpusError, Diagnostic, LoadReport,
    Schema, NOT_MINIMAL_EDIT_RATIO,
};

/// Label of one translation variant inside an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VariantLabel {
    /// Feminine inflection.
    F,
    /// Masculine inflection.
    M,
    /// Gender-neutral rewording.
    N,
    /// Gendered (non-neutral) translation.
    G,
}

impl fmt::Display for VariantLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VariantLabel::F => "F",
            VariantLabel::M => "M",
            VariantLabel::N => "N",
            VariantLabel::G => "G",
        };
        f.write_str(s)
    }
}

/// Referent gender of a source sentence; defines membership in `S^F` / `S^M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gender {
    F,
    M,
}

impl Gender {
    pub fn variant(self) -> VariantLabel {
        match self {
            Gender::F => VariantLabel::F,
            Gender::M => VariantLabel::M,
        }
    }

    pub fn other(self) -> Gender {
        match self {
            Gender::F => Gender::M,
            Gender::M => Gender::F,
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gender::F => "F",
            Gender::M => "M",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Ambiguous source, feminine vs. masculine translation.
    AmbiguousFm,
    /// Ambiguous source, gender-neutral vs. gendered translation.
    AmbiguousNeutral,
    /// Gender cue inside the source sentence.
    UnambiguousIntra,
    /// Gender cue in the preceding context sentence.
    UnambiguousExtra,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::AmbiguousFm,
        Condition::AmbiguousNeutral,
        Condition::UnambiguousIntra,
        Condition::UnambiguousExtra,
    ];

    /// The two variant labels an instance of this condition must carry.
    pub fn labels(self) -> [VariantLabel; 2] {
        match self {
            Condition::AmbiguousNeutral => [VariantLabel::N, VariantLabel::G],
            _ => [VariantLabel::F, VariantLabel::M],
        }
    }

    pub fn is_unambiguous(self) -> bool {
        matches!(self, Condition::UnambiguousIntra | Condition::UnambiguousExtra)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::AmbiguousFm => "ambiguous_fm",
            Condition::AmbiguousNeutral => "ambiguous_neutral",
            Condition::UnambiguousIntra => "unambiguous_intra",
            Condition::UnambiguousExtra => "unambiguous_extra",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Condition::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown condition `{s}`"))
    }
}

/// Source and target language tags, written `src-tgt` (e.g. `en-it`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LanguagePair {
    pub source: String,
    pub target: String,
}

impl LanguagePair {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        LanguagePair { source: source.into(), target: target.into() }
    }
}

impl fmt::Display for LanguagePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.source, self.target)
    }
}

impl FromStr for LanguagePair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(['-', '_']) {
            Some((src, tgt)) if !src.is_empty() && !tgt.is_empty() => {
                Ok(LanguagePair::new(src, tgt))
            }
            _ => Err(format!("language pair `{s}` is not of the form src-tgt")),
        }
    }
}

impl TryFrom<String> for LanguagePair {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<LanguagePair> for String {
    fn from(value: LanguagePair) -> Self {
        value.to_string()
    }
}

/// One contrastive unit: a source, optional preceding context, and two labeled
/// translations differing in gender marking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationInstance {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language_pair: Option<LanguagePair>,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    pub condition: Condition,
    pub variants: BTreeMap<VariantLabel, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct_variant: Option<VariantLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_group: Option<Gender>,
    /// Columns the loader did not recognize, kept verbatim.
    #[serde(flatten)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantViolation {
    #[error("variants must be exactly {expected:?} for condition {condition}, found {found:?}")]
    VariantLabels { condition: Condition, expected: [VariantLabel; 2], found: Vec<VariantLabel> },
    #[error("missing field `{0}` required by condition")]
    MissingField(&'static str),
    #[error("correct_variant {0} is not one of the variants")]
    CorrectVariantUnknown(VariantLabel),
    #[error("variant {0} has empty text")]
    EmptyVariant(VariantLabel),
    #[error("variant texts are identical")]
    IdenticalVariants,
    #[error("source text is empty")]
    EmptySource,
}

impl EvaluationInstance {
    /// Checks every structural invariant of the instance model.
    pub fn validate(&self) -> Result<(), InvariantViolation> {
        if self.source.trim().is_empty() {
            return Err(InvariantViolation::EmptySource);
        }
        let expected = self.condition.labels();
        let mut found: Vec<VariantLabel> = self.variants.keys().copied().collect();
        let mut want = expected.to_vec();
        want.sort();
        found.sort();
        if found != want {
            return Err(InvariantViolation::VariantLabels {
                condition: self.condition,
                expected,
                found,
            });
        }
        for (label, text) in &self.variants {
            if text.trim().is_empty() {
                return Err(InvariantViolation::EmptyVariant(*label));
            }
        }
        if self.variants[&expected[0]] == self.variants[&expected[1]] {
            return Err(InvariantViolation::IdenticalVariants);
        }
        if self.condition.is_unambiguous() {
            let correct =
                self.correct_variant.ok_or(InvariantViolation::MissingField("correct_variant"))?;
            if !self.variants.contains_key(&correct) {
                return Err(InvariantViolation::CorrectVariantUnknown(correct));
            }
            if self.source_group.is_none() {
                return Err(InvariantViolation::MissingField("source_group"));
            }
        }
        if self.condition == Condition::UnambiguousExtra
            && self.context.as_deref().map_or(true, |c| c.trim().is_empty())
        {
            return Err(InvariantViolation::MissingField("context"));
        }
        Ok(())
    }

    pub fn variant(&self, label: VariantLabel) -> Option<&str> {
        self.variants.get(&label).map(String::as_str)
    }

    /// The wrong gender form of an unambiguous instance.
    pub fn incorrect_variant(&self) -> Option<VariantLabel> {
        let correct = self.correct_variant?;
        self.variants.keys().copied().find(|l| *l != correct)
    }
}
