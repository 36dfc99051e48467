use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::mock::MockScorer;
use super::translate::{MapTranslator, TranslateEndpoint};
use super::wire::{LineChannel, WireScorer, WireTranslator};
use super::{ScaleDescriptor, ScoreRequest, ScoringError};

/// What a scorer declares about itself in its handshake.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerInfo {
    pub name: String,
    pub scale: ScaleDescriptor,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Score(serde_json::Value),
    Error(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawResponse {
    pub id: String,
    pub payload: Payload,
}

/// Responses collected for one batch. `timed_out` is set when collection stopped
/// because the endpoint went quiet rather than because every id was answered.
#[derive(Debug, Clone, Default)]
pub struct Exchange {
    pub responses: Vec<RawResponse>,
    pub timed_out: bool,
}

/// A QE scorer `f(source, hypothesis) -> raw score`.
pub trait ScoreEndpoint: Send {
    fn info(&self) -> &ScorerInfo;

    /// Sends every request and gathers whatever responses arrive, in arrival order.
    /// Id matching and validation are left to [`super::score_batch`].
    fn exchange(&mut self, requests: &[ScoreRequest]) -> Result<Exchange, ScoringError>;
}

#[derive(Debug, Clone, Copy)]
pub struct EndpointOptions {
    /// Longest silence tolerated while responses are outstanding.
    pub timeout: Duration,
    /// How many times unanswered requests are re-sent after a timeout.
    pub retries: u32,
}

impl Default for EndpointOptions {
    fn default() -> Self {
        EndpointOptions { timeout: Duration::from_secs(60), retries: 0 }
    }
}

fn bad(spec: &str, reason: impl Into<String>) -> ScoringError {
    ScoringError::BadEndpoint { spec: spec.to_string(), reason: reason.into() }
}

fn parse_f64(spec: &str, text: &str) -> Result<f64, ScoringError> {
    text.parse().map_err(|_| bad(spec, format!("`{text}` is not a number")))
}

fn open_channel(spec: &str, kind: &str, rest: &str, timeout: Duration) -> Result<LineChannel, ScoringError> {
    match kind {
        "cmd" => LineChannel::spawn(rest, timeout),
        "tcp" => LineChannel::connect_tcp(rest, timeout),
        #[cfg(unix)]
        "unix" => LineChannel::connect_unix(rest, timeout),
        _ => Err(bad(spec, format!("unknown endpoint kind `{kind}`"))),
    }
}

/// Opens a scorer from a spec string.
///
/// - `mock:constant:<v>`, `mock:hash`, `mock:hash:<lo>:<hi>`,
///   `mock:biased:<base>:<penalty>:<word>,<word>,...`
/// - `cmd:<command line>`: spawn an adapter and talk over its stdin/stdout
/// - `tcp:<host>:<port>`, `unix:<path>`: connect to a running adapter
pub fn open_scorer(spec: &str, options: EndpointOptions) -> Result<Box<dyn ScoreEndpoint>, ScoringError> {
    let (kind, rest) = spec.split_once(':').ok_or_else(|| bad(spec, "expected <kind>:<args>"))?;
    if kind == "mock" {
        return Ok(Box::new(parse_mock(spec, rest)?.endpoint()));
    }
    let channel = open_channel(spec, kind, rest, options.timeout)?;
    Ok(Box::new(WireScorer::handshake(channel, options.retries)?))
}

impl std::str::FromStr for MockScorer {
    type Err = ScoringError;

    /// Parses the part of a mock spec after `mock:`, e.g. `hash` or `constant:0.5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_mock(&format!("mock:{s}"), s)
    }
}

/// Parses a translator mock spec after `mock:`: `identity` or `const:<text>`.
pub fn parse_mock_translator(s: &str) -> Result<MapTranslator, ScoringError> {
    match s.split_once(':') {
        None if s == "identity" => Ok(MapTranslator::identity()),
        Some(("const", text)) => Ok(MapTranslator::constant(text)),
        _ => Err(bad(&format!("mock:{s}"), "unknown mock translator (identity, const:<text>)")),
    }
}

fn parse_mock(spec: &str, rest: &str) -> Result<MockScorer, ScoringError> {
    let parts: Vec<&str> = rest.splitn(4, ':').collect();
    match parts.as_slice() {
        ["constant", v] => Ok(MockScorer::Constant(parse_f64(spec, v)?)),
        ["hash"] => Ok(MockScorer::Hash),
        ["hash", lo, hi] => {
            let (lo, hi) = (parse_f64(spec, lo)?, parse_f64(spec, hi)?);
            if !(0.0 <= lo && lo < hi && hi <= 1.0) {
                return Err(bad(spec, "hash range must satisfy 0 <= lo < hi <= 1"));
            }
            Ok(MockScorer::HashRange { lo, hi })
        }
        ["biased", base, penalty, words] => Ok(MockScorer::Biased {
            base: parse_f64(spec, base)?,
            penalty: parse_f64(spec, penalty)?,
            markers: words.split(',').filter(|w| !w.is_empty()).map(str::to_string).collect(),
        }),
        _ => Err(bad(spec, "unknown mock (constant:<v>, hash, hash:<lo>:<hi>, biased:<base>:<penalty>:<words>)")),
    }
}

/// Opens a translator: `mock:identity`, `mock:const:<text>`, or a `cmd:`/`tcp:`/`unix:`
/// endpoint speaking the translation protocol.
pub fn open_translator(
    spec: &str,
    options: EndpointOptions,
) -> Result<Box<dyn TranslateEndpoint>, ScoringError> {
    let (kind, rest) = spec.split_once(':').ok_or_else(|| bad(spec, "expected <kind>:<args>"))?;
    if kind == "mock" {
        return Ok(Box::new(parse_mock_translator(rest)?));
    }
    let channel = open_channel(spec, kind, rest, options.timeout)?;
    Ok(Box::new(WireTranslator::new(channel, options.retries)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mock_specs() {
        let o = EndpointOptions::default();
        assert_eq!(open_scorer("mock:constant:0.5", o).unwrap().info().name, "mock:constant:0.5");
        assert_eq!(open_scorer("mock:hash", o).unwrap().info().scale, ScaleDescriptor::UNIT);
        let biased = open_scorer("mock:biased:0.8:0.05:accademica,professoressa", o).unwrap();
        assert!(biased.info().name.starts_with("mock:biased"));
        assert!(open_scorer("mock:hash:0.9:0.1", o).is_err());
        assert!(open_scorer("mock:nope", o).is_err());
        assert!(open_scorer("carrier-pigeon:x", o).is_err());
        assert!(open_scorer("plain", o).is_err());
        assert!(open_translator("mock:identity", o).is_ok());
        assert!(open_translator("mock:const:CTX", o).is_ok());
    }
}
