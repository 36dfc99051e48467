//! Deterministic in-process scorers for tests, examples and acceptance runs.

use sha2::{Digest, Sha256};

use super::endpoint::{Exchange, Payload, RawResponse, ScoreEndpoint, ScorerInfo};
use super::{ScaleDescriptor, ScoreRequest, ScoringError};
use crate::tokenize::tokenize;

/// Built-in scorers. All report raw scores on the unit scale, higher is better.
#[derive(Debug, Clone, PartialEq)]
pub enum MockScorer {
    /// Same score for every input.
    Constant(f64),
    /// Pseudo-uniform in `[0, 1)` from a hash of the `(source, hypothesis)` texts.
    Hash,
    /// Like [`MockScorer::Hash`], mapped affinely onto `[lo, hi)`.
    HashRange { lo: f64, hi: f64 },
    /// `base - penalty` when the hypothesis contains any marker token, `base` otherwise.
    Biased { base: f64, penalty: f64, markers: Vec<String> },
}

impl MockScorer {
    pub fn score(&self, source: &str, hypothesis: &str) -> f64 {
        match self {
            MockScorer::Constant(v) => *v,
            MockScorer::Hash => hash_unit(source, hypothesis),
            MockScorer::HashRange { lo, hi } => lo + (hi - lo) * hash_unit(source, hypothesis),
            MockScorer::Biased { base, penalty, markers } => {
                let marked = tokenize(hypothesis).iter().any(|t| markers.iter().any(|m| m == t));
                if marked {
                    base - penalty
                } else {
                    *base
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            MockScorer::Constant(v) => format!("mock:constant:{v}"),
            MockScorer::Hash => "mock:hash".to_string(),
            MockScorer::HashRange { lo, hi } => format!("mock:hash:{lo}:{hi}"),
            MockScorer::Biased { base, penalty, markers } => {
                format!("mock:biased:{base}:{penalty}:{}", markers.join(","))
            }
        }
    }

    pub fn endpoint(self) -> MockEndpoint {
        let info = ScorerInfo { name: self.name(), scale: ScaleDescriptor::UNIT };
        MockEndpoint { mock: self, info }
    }
}

fn hash_unit(source: &str, hypothesis: &str) -> f64 {
    let mut h = Sha256::new();
    h.update(source.as_bytes());
    h.update([0u8]);
    h.update(hypothesis.as_bytes());
    let digest = h.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    // top 53 bits give an exactly representable value in [0, 1)
    (u64::from_be_bytes(word) >> 11) as f64 / (1u64 << 53) as f64
}

#[derive(Debug, Clone)]
pub struct MockEndpoint {
    mock: MockScorer,
    info: ScorerInfo,
}

impl MockEndpoint {
    pub fn mock(&self) -> &MockScorer {
        &self.mock
    }
}

impl ScoreEndpoint for MockEndpoint {
    fn info(&self) -> &ScorerInfo {
        &self.info
    }

    fn exchange(&mut self, requests: &[ScoreRequest]) -> Result<Exchange, ScoringError> {
        let responses = requests
            .iter()
            .map(|r| RawResponse {
                id: r.id.clone(),
                payload: Payload::Score(
                    self.mock.score(&r.source_text, &r.hypothesis_text).into(),
                ),
            })
            .collect();
        Ok(Exchange { responses, timed_out: false })
    }
}
