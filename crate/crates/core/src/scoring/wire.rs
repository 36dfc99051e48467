//! Line-delimited JSON wire protocol for out-of-process scorers and translators.
//!
//! Scorer session:
//!
//! ```text
//! scorer  -> {"name":"metricx-23-xl","scale_min":0,"scale_max":25,"higher_is_better":false}
//! harness -> {"id":"x1#F","source":"...","hypothesis":"..."}      (optional "reference")
//! scorer  -> {"id":"x1#F","score":3.25}        or {"id":"x1#F","error":"..."}
//! ```
//!
//! Translator session (no handshake):
//!
//! ```text
//! harness    -> {"id":"t0","text":"...","target_lang":"it"}
//! translator -> {"id":"t0","translation":"..."}   or {"id":"t0","error":"..."}
//! ```
//!
//! Responses may arrive in any order; they are matched by id. The transport is the
//! child's stdin/stdout, a TCP connection or a Unix socket.

use std::collections::{HashMap, HashSet};
use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::endpoint::{Exchange, Payload, RawResponse, ScoreEndpoint, ScorerInfo};
use super::mock::MockScorer;
use super::translate::{MapTranslator, TranslateEndpoint};
use super::{ScaleDescriptor, ScoreRequest, ScoringError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Handshake {
    pub name: String,
    pub scale_min: f64,
    pub scale_max: f64,
    pub higher_is_better: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WireRequest {
    pub id: String,
    pub source: String,
    pub hypothesis: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WireResponse {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TranslateRequest {
    pub id: String,
    pub text: String,
    pub target_lang: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TranslateResponse {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

enum Incoming {
    Line(String),
    Closed,
    Failed(String),
}

pub enum Received {
    Line(String),
    Timeout,
    Closed,
}

/// A bidirectional line stream with a background reader, so the peer never blocks
/// writing responses while the harness is still sending requests.
pub struct LineChannel {
    writer: Box<dyn Write + Send>,
    rx: Receiver<Incoming>,
    timeout: Duration,
    child: Option<Child>,
    /// Shuts a socket down on drop; a cloned reader half would otherwise keep it open.
    on_close: Option<Box<dyn FnOnce() + Send>>,
    closed: bool,
}

impl LineChannel {
    pub fn from_streams<R, W>(reader: R, writer: W, timeout: Duration) -> Self
    where
        R: Read + Send + 'static,
        W: Write + Send + 'static,
    {
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(reader).lines() {
                let msg = match line {
                    Ok(l) if l.trim().is_empty() => continue,
                    Ok(l) => Incoming::Line(l),
                    Err(e) => {
                        let _ = tx.send(Incoming::Failed(e.to_string()));
                        return;
                    }
                };
                if tx.send(msg).is_err() {
                    return;
                }
            }
            let _ = tx.send(Incoming::Closed);
        });
        LineChannel { writer: Box::new(io::BufWriter::new(writer)), rx, timeout, child: None, on_close: None, closed: false }
    }

    /// Spawns `command` through the shell and talks over its stdin/stdout.
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self, ScoringError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let mut channel = LineChannel::from_streams(stdout, stdin, timeout);
        channel.child = Some(child);
        Ok(channel)
    }

    pub fn connect_tcp(addr: &str, timeout: Duration) -> Result<Self, ScoringError> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let reader = stream.try_clone()?;
        let closer = stream.try_clone()?;
        let mut channel = LineChannel::from_streams(reader, stream, timeout);
        channel.on_close = Some(Box::new(move || {
            let _ = closer.shutdown(std::net::Shutdown::Both);
        }));
        Ok(channel)
    }

    #[cfg(unix)]
    pub fn connect_unix(path: &str, timeout: Duration) -> Result<Self, ScoringError> {
        let stream = std::os::unix::net::UnixStream::connect(path)?;
        let reader = stream.try_clone()?;
        let closer = stream.try_clone()?;
        let mut channel = LineChannel::from_streams(reader, stream, timeout);
        channel.on_close = Some(Box::new(move || {
            let _ = closer.shutdown(std::net::Shutdown::Both);
        }));
        Ok(channel)
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    pub fn send<T: Serialize>(&mut self, messages: impl IntoIterator<Item = T>) -> io::Result<()> {
        for msg in messages {
            serde_json::to_writer(&mut self.writer, &msg)?;
            self.writer.write_all(b"\n")?;
        }
        self.writer.flush()
    }

    pub fn recv(&mut self) -> Result<Received, ScoringError> {
        if self.closed {
            return Ok(Received::Closed);
        }
        match self.rx.recv_timeout(self.timeout) {
            Ok(Incoming::Line(l)) => Ok(Received::Line(l)),
            Ok(Incoming::Failed(e)) => {
                self.closed = true;
                Err(ScoringError::Io(io::Error::other(e)))
            }
            Ok(Incoming::Closed) | Err(RecvTimeoutError::Disconnected) => {
                self.closed = true;
                Ok(Received::Closed)
            }
            Err(RecvTimeoutError::Timeout) => Ok(Received::Timeout),
        }
    }
}

impl Drop for LineChannel {
    fn drop(&mut self) {
        let _ = self.writer.flush();
        // closing stdin lets well-behaved adapters exit on their own
        self.writer = Box::new(io::sink());
        if let Some(close) = self.on_close.take() {
            close();
        }
        if let Some(mut child) = self.child.take() {
            for _ in 0..20 {
                if let Ok(Some(_)) = child.try_wait() {
                    return;
                }
                thread::sleep(Duration::from_millis(5));
            }
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

/// Client side of the scorer protocol.
pub struct WireScorer {
    channel: LineChannel,
    info: ScorerInfo,
    retries: u32,
}

impl WireScorer {
    /// Reads the scorer's handshake line and validates its declared scale.
    pub fn handshake(mut channel: LineChannel, retries: u32) -> Result<Self, ScoringError> {
        let line = match channel.recv()? {
            Received::Line(l) => l,
            Received::Timeout => {
                return Err(ScoringError::Protocol(format!(
                    "no handshake within {:?}",
                    channel.timeout()
                )))
            }
            Received::Closed => {
                return Err(ScoringError::Protocol("scorer closed before handshake".into()))
            }
        };
        let hs: Handshake = serde_json::from_str(&line)
            .map_err(|e| ScoringError::Protocol(format!("bad handshake `{line}`: {e}")))?;
        let scale = ScaleDescriptor::new(hs.scale_min, hs.scale_max, hs.higher_is_better)?;
        Ok(WireScorer { channel, info: ScorerInfo { name: hs.name, scale }, retries })
    }
}

fn wire_request(r: &ScoreRequest) -> WireRequest {
    WireRequest {
        id: r.id.clone(),
        source: r.source_text.clone(),
        hypothesis: r.hypothesis_text.clone(),
        reference: r.reference_text.clone(),
    }
}

impl ScoreEndpoint for WireScorer {
    fn info(&self) -> &ScorerInfo {
        &self.info
    }

    fn exchange(&mut self, requests: &[ScoreRequest]) -> Result<Exchange, ScoringError> {
        let expected: HashSet<&str> = requests.iter().map(|r| r.id.as_str()).collect();
        let mut answered: HashSet<String> = HashSet::new();
        let mut resent: HashSet<String> = HashSet::new();
        let mut out = Exchange::default();
        self.channel.send(requests.iter().map(wire_request))?;

        let mut attempts = 0;
        while answered.len() < expected.len() {
            match self.channel.recv()? {
                Received::Line(line) => {
                    let resp: WireResponse = serde_json::from_str(&line).map_err(|e| {
                        ScoringError::Protocol(format!("malformed response `{line}`: {e}"))
                    })?;
                    let known = expected.contains(resp.id.as_str());
                    let first = answered.insert(resp.id.clone());
                    if known && !first && resent.contains(&resp.id) {
                        // late answer to a request we re-sent
                        continue;
                    }
                    let payload = match (resp.error, resp.score) {
                        (Some(e), _) => Payload::Error(e),
                        (None, score) => Payload::Score(score.unwrap_or(serde_json::Value::Null)),
                    };
                    out.responses.push(RawResponse { id: resp.id, payload });
                    if !known || !first {
                        break;
                    }
                }
                Received::Timeout if attempts < self.retries => {
                    attempts += 1;
                    let pending: Vec<&ScoreRequest> =
                        requests.iter().filter(|r| !answered.contains(&r.id)).collect();
                    resent.extend(pending.iter().map(|r| r.id.clone()));
                    self.channel.send(pending.into_iter().map(wire_request))?;
                }
                Received::Timeout => {
                    out.timed_out = true;
                    break;
                }
                Received::Closed => break,
            }
        }
        Ok(out)
    }
}

/// Client side of the translator protocol.
pub struct WireTranslator {
    channel: LineChannel,
    retries: u32,
    next_id: u64,
}

impl WireTranslator {
    pub fn new(channel: LineChannel, retries: u32) -> Self {
        WireTranslator { channel, retries, next_id: 0 }
    }
}

impl TranslateEndpoint for WireTranslator {
    fn translate(&mut self, texts: &[String], target_lang: &str) -> Result<Vec<String>, ScoringError> {
        let requests: Vec<TranslateRequest> = texts
            .iter()
            .map(|t| {
                self.next_id += 1;
                TranslateRequest {
                    id: format!("t{}", self.next_id),
                    text: t.clone(),
                    target_lang: target_lang.to_string(),
                }
            })
            .collect();
        let position: HashMap<String, usize> =
            requests.iter().enumerate().map(|(i, r)| (r.id.clone(), i)).collect();
        let mut results: Vec<Option<String>> = vec![None; texts.len()];
        let mut remaining = texts.len();
        self.channel.send(&requests)?;

        let mut attempts = 0;
        while remaining > 0 {
            match self.channel.recv()? {
                Received::Line(line) => {
                    let resp: TranslateResponse = serde_json::from_str(&line).map_err(|e| {
                        ScoringError::Protocol(format!("malformed translator response `{line}`: {e}"))
                    })?;
                    let &pos = position.get(&resp.id).ok_or_else(|| {
                        ScoringError::Protocol(format!("translation for unknown id `{}`", resp.id))
                    })?;
                    if let Some(e) = resp.error {
                        return Err(ScoringError::Translator(format!("position {pos}: {e}")));
                    }
                    let text = resp.translation.filter(|t| !t.trim().is_empty());
                    let Some(text) = text else {
                        return Err(ScoringError::EmptyTranslation(pos));
                    };
                    if results[pos].replace(text).is_none() {
                        remaining -= 1;
                    }
                }
                Received::Timeout if attempts < self.retries => {
                    attempts += 1;
                    let pending = requests.iter().enumerate().filter(|(i, _)| results[*i].is_none());
                    self.channel.send(pending.map(|(_, r)| r))?;
                }
                Received::Timeout | Received::Closed => break,
            }
        }
        results
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.ok_or(ScoringError::EmptyTranslation(i)))
            .collect()
    }
}

/// Behavior knobs for [`serve_scorer`], used to exercise the client against
/// misbehaving endpoints.
#[derive(Debug, Clone, Default)]
pub struct ServeOptions {
    /// Buffer responses until the input has been idle this long, then emit them in
    /// reverse arrival order.
    pub reverse_after_idle: Option<Duration>,
    /// Never answer these ids.
    pub drop_ids: HashSet<String>,
}

/// Serves a mock scorer over a line stream until the input closes.
/// Returns the number of requests answered.
pub fn serve_scorer<R, W>(
    mock: &MockScorer,
    reader: R,
    mut writer: W,
    options: &ServeOptions,
) -> io::Result<usize>
where
    R: Read + Send + 'static,
    W: Write,
{
    let hs = Handshake {
        name: mock.name(),
        scale_min: 0.0,
        scale_max: 1.0,
        higher_is_better: true,
    };
    serde_json::to_writer(&mut writer, &hs)?;
    writer.write_all(b"\n")?;
    writer.flush()?;

    let (tx, rx) = mpsc::channel::<io::Result<String>>();
    thread::spawn(move || {
        for line in BufReader::new(reader).lines() {
            if tx.send(line).is_err() {
                return;
            }
        }
    });

    let respond = |line: &str| -> Option<WireResponse> {
        match serde_json::from_str::<WireRequest>(line) {
            Ok(req) if options.drop_ids.contains(&req.id) => None,
            Ok(req) => Some(WireResponse {
                score: Some(mock.score(&req.source, &req.hypothesis).into()),
                id: req.id,
                error: None,
            }),
            Err(e) => Some(WireResponse {
                id: String::new(),
                score: None,
                error: Some(format!("malformed request: {e}")),
            }),
        }
    };

    let mut pending: Vec<WireResponse> = Vec::new();
    let mut answered = 0;
    let mut emit = |writer: &mut W, batch: &mut Vec<WireResponse>| -> io::Result<()> {
        while let Some(resp) = batch.pop() {
            serde_json::to_writer(&mut *writer, &resp)?;
            writer.write_all(b"\n")?;
            answered += 1;
        }
        writer.flush()
    };

    loop {
        let next = match options.reverse_after_idle {
            Some(idle) => match rx.recv_timeout(idle) {
                Ok(line) => Some(line?),
                Err(RecvTimeoutError::Timeout) => {
                    emit(&mut writer, &mut pending)?;
                    continue;
                }
                Err(RecvTimeoutError::Disconnected) => None,
            },
            None => rx.recv().ok().transpose()?,
        };
        let Some(line) = next else { break };
        if line.trim().is_empty() {
            continue;
        }
        if let Some(resp) = respond(&line) {
            pending.push(resp);
        }
        if options.reverse_after_idle.is_none() {
            emit(&mut writer, &mut pending)?;
        }
    }
    emit(&mut writer, &mut pending)?;
    Ok(answered)
}

/// Serves a [`MapTranslator`] over a line stream until the input closes.
pub fn serve_translator<R: BufRead, W: Write>(
    translator: &MapTranslator,
    reader: R,
    mut writer: W,
) -> io::Result<()> {
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let resp = match serde_json::from_str::<TranslateRequest>(&line) {
            Ok(req) => TranslateResponse {
                translation: Some(translator.apply(&req.text)),
                id: req.id,
                error: None,
            },
            Err(e) => TranslateResponse {
                id: String::new(),
                translation: None,
                error: Some(format!("malformed request: {e}")),
            },
        };
        serde_json::to_writer(&mut writer, &resp)?;
        writer.write_all(b"\n")?;
        writer.flush()?;
    }
    Ok(())
}

#[cfg(all(test, unix))]
mod tests {
    use std::os::unix::net::UnixStream;

    use super::*;
    use crate::scoring::score_batch;

    fn served(options: ServeOptions, timeout: Duration) -> WireScorer {
        let (client, server) = UnixStream::pair().unwrap();
        let server_reader = server.try_clone().unwrap();
        thread::spawn(move || serve_scorer(&MockScorer::Hash, server_reader, server, &options));
        let reader = client.try_clone().unwrap();
        WireScorer::handshake(LineChannel::from_streams(reader, client, timeout), 0).unwrap()
    }

    fn reqs(n: usize) -> Vec<ScoreRequest> {
        (0..n).map(|i| ScoreRequest::new(format!("q{i}"), "src", format!("hyp {i}"))).collect()
    }

    #[test]
    fn handshake_and_in_order_scores() {
        let mut scorer = served(ServeOptions::default(), Duration::from_secs(5));
        assert_eq!(scorer.info().name, "mock:hash");
        let scale = scorer.info().scale;
        let recs = score_batch(&mut scorer, &reqs(5), scale).unwrap();
        for (r, req) in recs.iter().zip(reqs(5)) {
            assert_eq!(r.raw, MockScorer::Hash.score(&req.source_text, &req.hypothesis_text));
        }
    }

    #[test]
    fn reversed_responses_are_matched() {
        let opts = ServeOptions { reverse_after_idle: Some(Duration::from_millis(30)), ..Default::default() };
        let mut scorer = served(opts, Duration::from_secs(5));
        let requests = reqs(50);
        let recs = score_batch(&mut scorer, &requests, ScaleDescriptor::UNIT).unwrap();
        assert_eq!(recs.len(), 50);
        for (r, req) in recs.iter().zip(&requests) {
            assert_eq!(r.id, req.id);
            assert_eq!(r.raw, MockScorer::Hash.score(&req.source_text, &req.hypothesis_text));
        }
    }

    #[test]
    fn dropped_response_times_out_naming_id() {
        let opts = ServeOptions { drop_ids: HashSet::from(["q3".to_string()]), ..Default::default() };
        let mut scorer = served(opts, Duration::from_millis(200));
        match score_batch(&mut scorer, &reqs(6), ScaleDescriptor::UNIT) {
            Err(ScoringError::Timeout(ids)) => assert_eq!(ids, vec!["q3".to_string()]),
            other => panic!("expected timeout, got {other:?}"),
        }
    }

    #[test]
    fn bad_handshake_is_protocol_error() {
        let (client, mut server) = UnixStream::pair().unwrap();
        server.write_all(b"{\"name\":\"x\",\"scale_min\":5,\"scale_max\":1,\"higher_is_better\":true}\n").unwrap();
        let reader = client.try_clone().unwrap();
        let res = WireScorer::handshake(LineChannel::from_streams(reader, client, Duration::from_secs(1)), 0);
        assert!(matches!(res, Err(ScoringError::InvalidScale { .. })));
    }

    #[test]
    fn translator_round_trip() {
        let (client, server) = UnixStream::pair().unwrap();
        let server_reader = BufReader::new(server.try_clone().unwrap());
        thread::spawn(move || serve_translator(&MapTranslator::constant("CTX"), server_reader, server));
        let reader = client.try_clone().unwrap();
        let mut t = WireTranslator::new(LineChannel::from_streams(reader, client, Duration::from_secs(5)), 0);
        let out = t.translate(&["a".into(), "b".into()], "it").unwrap();
        assert_eq!(out, vec!["CTX".to_string(), "CTX".to_string()]);
    }
}
