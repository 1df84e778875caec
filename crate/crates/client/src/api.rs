//! Transport to the evaluation service and the loop that drives a session
//! to closure. Connection failures retry with doubling backoff; anything
//! the server answers, including errors, is final.

use crate::segment::{ScribbleStore, Segmenter, SequenceContext};
use crate::ClientError;
use scribbleval_core::raster::rle::encode_runs;
use scribbleval_core::raster::{LabelMask, RasterSize};
use scribbleval_core::robot::wire::WireScribbleSet;
use scribbleval_core::session::curve::SessionReport;
use serde::Deserialize;
use serde_json::{json, Value};
use std::time::Duration;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpenTarget {
    Sequence(String),
    Split(String),
}

#[derive(Debug, Clone)]
pub struct OpenedSession {
    pub session_id: String,
    pub context: SequenceContext,
    pub scribbles: WireScribbleSet,
}

#[derive(Debug)]
pub enum ClientTurn {
    Scribbles(WireScribbleSet),
    Report(Box<SessionReport>),
}

/// One session-granting backend: the HTTP service or an in-process stand-in.
pub trait Transport {
    fn open(&mut self, target: &OpenTarget) -> Result<OpenedSession, ClientError>;
    fn submit(&mut self, session_id: &str, masks: &[LabelMask])
        -> Result<ClientTurn, ClientError>;
}

/// Serialize masks as per-object run-length payloads, absent objects omitted.
pub fn masks_to_wire(masks: &[LabelMask]) -> Value {
    let frames: Vec<Value> = masks
        .iter()
        .map(|mask| {
            let mut objects = serde_json::Map::new();
            for id in mask.object_ids() {
                objects.insert(
                    id.to_string(),
                    json!(encode_runs(&mask.extract_object(id))),
                );
            }
            json!({ "objects": objects })
        })
        .collect();
    json!({ "masks": frames })
}

#[derive(Deserialize)]
struct OpenWire {
    session_id: String,
    sequence: String,
    frames: usize,
    width: u32,
    height: u32,
    objects: Vec<u8>,
    scribbles: WireScribbleSet,
}

#[derive(Deserialize)]
struct TurnWire {
    #[serde(default)]
    scribbles: Option<WireScribbleSet>,
    #[serde(default)]
    report: Option<SessionReport>,
}

#[derive(Deserialize)]
struct ErrorWire {
    code: String,
    message: String,
}

pub struct ApiClient {
    http: reqwest::blocking::Client,
    base: String,
    token: Option<String>,
    max_attempts: u32,
    backoff: Duration,
}

impl ApiClient {
    pub fn new(base: impl Into<String>, token: Option<String>) -> Result<ApiClient, ClientError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        Ok(ApiClient {
            http,
            base: base.into().trim_end_matches('/').to_owned(),
            token,
            max_attempts: 3,
            backoff: Duration::from_millis(200),
        })
    }

    pub fn with_retry(mut self, max_attempts: u32, backoff: Duration) -> ApiClient {
        self.max_attempts = max_attempts.max(1);
        self.backoff = backoff;
        self
    }

    /// Sends one request, retrying only failures where no response arrived
    /// (refused or dropped connections). Server answers are never retried.
    fn exchange(
        &self,
        method: reqwest::Method,
        path: &str,
        body: Option<&Value>,
    ) -> Result<(u16, Vec<u8>), ClientError> {
        let url = format!("{}{}", self.base, path);
        let mut wait = self.backoff;
        let mut last_err = String::new();
        for attempt in 0..self.max_attempts {
            if attempt > 0 {
                std::thread::sleep(wait);
                wait *= 2;
            }
            let mut req = self.http.request(method.clone(), &url);
            if let Some(token) = &self.token {
                req = req.header("authorization", format!("Bearer {token}"));
            }
            if let Some(body) = body {
                req = req
                    .header("content-type", "application/json")
                    .body(body.to_string());
            }
            match req.send() {
                Ok(response) => {
                    let status = response.status().as_u16();
                    let bytes = response
                        .bytes()
                        .map_err(|e| ClientError::Transport(e.to_string()))?;
                    return Ok((status, bytes.to_vec()));
                }
                Err(e) if e.is_connect() || e.is_timeout() => {
                    last_err = e.to_string();
                }
                Err(e) => return Err(ClientError::Transport(e.to_string())),
            }
        }
        Err(ClientError::Transport(format!(
            "{url}: no connection after {} attempts: {last_err}",
            self.max_attempts
        )))
    }

    fn expect<T: serde::de::DeserializeOwned>(
        &self,
        status: u16,
        bytes: &[u8],
    ) -> Result<T, ClientError> {
        if (200..300).contains(&status) {
            return serde_json::from_slice(bytes).map_err(|e| {
                ClientError::BadResponse(format!(
                    "{e} in {:?}",
                    String::from_utf8_lossy(&bytes[..bytes.len().min(200)])
                ))
            });
        }
        match serde_json::from_slice::<ErrorWire>(bytes) {
            Ok(err) => Err(ClientError::Protocol {
                code: err.code,
                message: err.message,
            }),
            Err(_) => Err(ClientError::BadResponse(format!(
                "status {status}: {:?}",
                String::from_utf8_lossy(&bytes[..bytes.len().min(200)])
            ))),
        }
    }

    pub fn health(&self) -> Result<(), ClientError> {
        let (status, bytes) = self.exchange(reqwest::Method::GET, "/health", None)?;
        let _: Value = self.expect(status, &bytes)?;
        Ok(())
    }

    pub fn open(&self, target: &OpenTarget) -> Result<OpenedSession, ClientError> {
        let body = match target {
            OpenTarget::Sequence(name) => json!({ "sequence": name }),
            OpenTarget::Split(name) => json!({ "split": name }),
        };
        let (status, bytes) = self.exchange(reqwest::Method::POST, "/session", Some(&body))?;
        let wire: OpenWire = self.expect(status, &bytes)?;
        let size = RasterSize::new(wire.width, wire.height)
            .map_err(|e| ClientError::BadResponse(e.to_string()))?;
        Ok(OpenedSession {
            session_id: wire.session_id,
            context: SequenceContext {
                sequence: wire.sequence,
                frames: wire.frames,
                size,
                objects: wire.objects,
            },
            scribbles: wire.scribbles,
        })
    }

    pub fn submit(&self, session_id: &str, masks: &[LabelMask]) -> Result<ClientTurn, ClientError> {
        let body = masks_to_wire(masks);
        let (status, bytes) = self.exchange(
            reqwest::Method::POST,
            &format!("/session/{session_id}/prediction"),
            Some(&body),
        )?;
        let wire: TurnWire = self.expect(status, &bytes)?;
        match (wire.scribbles, wire.report) {
            (Some(set), None) => Ok(ClientTurn::Scribbles(set)),
            (None, Some(report)) => Ok(ClientTurn::Report(Box::new(report))),
            _ => Err(ClientError::BadResponse(
                "turn response must carry scribbles or a report".into(),
            )),
        }
    }

    pub fn report(&self, session_id: &str) -> Result<SessionReport, ClientError> {
        let (status, bytes) =
            self.exchange(reqwest::Method::GET, &format!("/session/{session_id}/report"), None)?;
        self.expect(status, &bytes)
    }
}

impl Transport for ApiClient {
    fn open(&mut self, target: &OpenTarget) -> Result<OpenedSession, ClientError> {
        ApiClient::open(self, target)
    }

    fn submit(
        &mut self,
        session_id: &str,
        masks: &[LabelMask],
    ) -> Result<ClientTurn, ClientError> {
        ApiClient::submit(self, session_id, masks)
    }
}

#[derive(Debug)]
pub struct LoopOutcome {
    pub session_id: String,
    pub sequence: String,
    pub report: SessionReport,
    pub turns: usize,
}

/// Drive one session to closure: open, then predict and submit until the
/// server answers with a report. `max_turns` is a local safety net against
/// a server that never closes; the server's own limits end sessions first.
pub fn run_interactive_loop(
    transport: &mut dyn Transport,
    target: &OpenTarget,
    segmenter: &mut dyn Segmenter,
    max_turns: usize,
) -> Result<LoopOutcome, ClientError> {
    if max_turns == 0 {
        return Err(ClientError::BadParam("max_turns must be at least 1".into()));
    }
    let opened = transport.open(target)?;
    let mut store = ScribbleStore::new(&opened.context);
    store.absorb(&opened.scribbles)?;
    for turn in 1..=max_turns {
        let masks = segmenter.predict(&opened.context, &store)?;
        match transport.submit(&opened.session_id, &masks)? {
            ClientTurn::Report(report) => {
                return Ok(LoopOutcome {
                    session_id: opened.session_id,
                    sequence: opened.context.sequence,
                    report: *report,
                    turns: turn,
                })
            }
            ClientTurn::Scribbles(set) => store.absorb(&set)?,
        }
    }
    Err(ClientError::Aborted(format!(
        "session still open after {max_turns} turns"
    )))
}
