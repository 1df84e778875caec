//! Service state: the session registry and everything that must survive a
//! process restart. Reports for closed sessions are written once and then
//! served as raw bytes, so repeated reads and restarts are byte-identical.

use crate::config::ServiceConfig;
use crate::dataset::{DatasetError, Repository};
use scribbleval_core::raster::rle::decode_runs;
use scribbleval_core::raster::{LabelMask, RasterSize};
use scribbleval_core::robot::wire::{to_wire, WireScribbleSet};
use scribbleval_core::session::curve::{session_report, SessionReport};
use scribbleval_core::session::log::{LogError, LogHeader, LogWriter};
use scribbleval_core::session::{SessionConfig, SessionError, SessionState, TurnOutcome};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, TryLockError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Auth,
    NotFound,
    Phase,
    Format,
    Busy,
    Quota,
    Internal,
}

impl ErrorCode {
    pub fn http_status(self) -> u16 {
        match self {
            ErrorCode::Auth => 401,
            ErrorCode::NotFound => 404,
            ErrorCode::Quota => 403,
            ErrorCode::Phase | ErrorCode::Busy => 409,
            ErrorCode::Format => 400,
            ErrorCode::Internal => 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceError {
    pub code: ErrorCode,
    pub message: String,
}

impl std::fmt::Display for ServiceError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}: {}", self.code, self.message)
    }
}

impl std::error::Error for ServiceError {}

impl ServiceError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ServiceError {
            code,
            message: message.into(),
        }
    }

    fn not_found() -> Self {
        // deliberately uniform: unknown ids and foreign sessions are
        // indistinguishable to the caller
        ServiceError::new(ErrorCode::NotFound, "no such session")
    }
}

impl From<SessionError> for ServiceError {
    fn from(e: SessionError) -> Self {
        let code = match &e {
            SessionError::Phase(_) => ErrorCode::Phase,
            SessionError::FrameCount { .. }
            | SessionError::UnknownLabel(_)
            | SessionError::BadCompute(_)
            | SessionError::Metrics(_) => ErrorCode::Format,
            _ => ErrorCode::Internal,
        };
        ServiceError::new(code, e.to_string())
    }
}

impl From<DatasetError> for ServiceError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::UnknownSequence(name) => {
                ServiceError::new(ErrorCode::NotFound, format!("unknown sequence {name:?}"))
            }
            other => ServiceError::new(ErrorCode::Internal, other.to_string()),
        }
    }
}

impl From<LogError> for ServiceError {
    fn from(e: LogError) -> Self {
        ServiceError::new(ErrorCode::Internal, e.to_string())
    }
}

/// Per-frame wire payload: either per-object run-length data or a raw
/// label row-major array (debugging aid). An empty object map marks a
/// background-only frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireFrame {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objects: Option<BTreeMap<String, Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WirePrediction {
    pub masks: Vec<WireFrame>,
}

fn format_err(message: impl Into<String>) -> ServiceError {
    ServiceError::new(ErrorCode::Format, message)
}

/// Decode one wire frame into a label mask. Object runs must not overlap:
/// two objects claiming one pixel is a format error, not a precedence
/// question.
fn decode_frame(frame: &WireFrame, size: RasterSize, index: usize) -> Result<LabelMask, ServiceError> {
    match (&frame.objects, &frame.labels) {
        (Some(_), Some(_)) => Err(format_err(format!(
            "frame {index}: give objects or labels, not both"
        ))),
        (None, Some(labels)) => LabelMask::from_vec(size, labels.clone())
            .map_err(|e| format_err(format!("frame {index}: {e}"))),
        (objects, None) => {
            let mut mask = LabelMask::new(size);
            let empty = BTreeMap::new();
            let objects = objects.as_ref().unwrap_or(&empty);
            for (key, runs) in objects {
                let id: u8 = key
                    .parse()
                    .map_err(|_| format_err(format!("frame {index}: bad object id {key:?}")))?;
                if id == 0 {
                    return Err(format_err(format!(
                        "frame {index}: object id 0 is the background"
                    )));
                }
                let bits = decode_runs(size, runs)
                    .map_err(|e| format_err(format!("frame {index} object {id}: {e}")))?;
                for (x, y) in bits.iter_ones() {
                    if mask.get(x, y) != 0 {
                        return Err(format_err(format!(
                            "frame {index}: objects overlap at ({x}, {y})"
                        )));
                    }
                    mask.set(x, y, id);
                }
            }
            Ok(mask)
        }
    }
}

pub fn decode_prediction(
    wire: &WirePrediction,
    size: RasterSize,
) -> Result<Vec<LabelMask>, ServiceError> {
    wire.masks
        .iter()
        .enumerate()
        .map(|(i, f)| decode_frame(f, size, i))
        .collect()
}

/// What the open call hands back to the transport layer.
#[derive(Debug)]
pub struct Opened {
    pub session_id: String,
    pub sequence: String,
    pub frames: usize,
    pub size: RasterSize,
    pub objects: Vec<u8>,
    pub scribbles: WireScribbleSet,
}

#[derive(Debug)]
pub enum TurnReply {
    Scribbles(WireScribbleSet),
    Report(Box<SessionReport>),
}

pub enum OpenTarget<'a> {
    Sequence(&'a str),
    Split(&'a str),
}

struct Slot {
    state: SessionState,
    log: LogWriter,
}

struct SessionEntry {
    token: String,
    sequence: String,
    frames: usize,
    size: RasterSize,
    closed: AtomicBool,
    slot: Mutex<Slot>,
}

#[derive(Serialize, Deserialize)]
struct OwnerRecord {
    token: String,
    sequence: String,
}

pub struct EvalService {
    config: ServiceConfig,
    repo: Repository,
    sessions: Mutex<BTreeMap<String, Arc<SessionEntry>>>,
    /// How often each token has been assigned each sequence; drives the
    /// round-robin pick for split opens. In-memory only.
    assignments: Mutex<BTreeMap<(String, String), usize>>,
}

impl EvalService {
    pub fn new(config: ServiceConfig) -> Result<EvalService, ServiceError> {
        let repo = Repository::open(&config.dataset_root)
            .map_err(|e| ServiceError::new(ErrorCode::Internal, e.to_string()))?;
        for sub in ["sessions", "reports", "meta"] {
            let dir = config.data_dir.join(sub);
            std::fs::create_dir_all(&dir).map_err(|e| {
                ServiceError::new(
                    ErrorCode::Internal,
                    format!("creating {}: {e}", dir.display()),
                )
            })?;
        }
        Ok(EvalService {
            config,
            repo,
            sessions: Mutex::new(BTreeMap::new()),
            assignments: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn repo(&self) -> &Repository {
        &self.repo
    }

    /// Resolve the caller's bearer token. With no configured token list
    /// every caller is accepted and missing credentials map to a shared
    /// anonymous identity.
    pub fn authenticate(&self, bearer: Option<&str>) -> Result<String, ServiceError> {
        match (&self.config.tokens, bearer) {
            (None, Some(t)) => Ok(t.to_owned()),
            (None, None) => Ok("anonymous".to_owned()),
            (Some(allowed), Some(t)) if allowed.iter().any(|a| a == t) => Ok(t.to_owned()),
            (Some(_), _) => Err(ServiceError::new(
                ErrorCode::Auth,
                "missing or unrecognized token",
            )),
        }
    }

    fn sessions_path(&self, id: &str) -> PathBuf {
        self.config.data_dir.join("sessions").join(format!("{id}.jsonl"))
    }

    fn report_path(&self, id: &str) -> PathBuf {
        self.config
            .data_dir
            .join("reports")
            .join(format!("{id}.report.json"))
    }

    fn meta_path(&self, id: &str) -> PathBuf {
        self.config.data_dir.join("meta").join(format!("{id}.json"))
    }

    fn open_session_count(&self, token: &str) -> usize {
        let sessions = self.sessions.lock().expect("sessions lock");
        sessions
            .values()
            .filter(|e| e.token == token && !e.closed.load(Ordering::Acquire))
            .count()
    }

    /// Pick the split member this token has been assigned least often,
    /// ties resolved by split order, so successive opens sweep the split.
    fn pick_from_split(&self, token: &str, split: &str) -> Result<String, ServiceError> {
        let members = self
            .repo
            .split(split)
            .ok_or_else(|| ServiceError::new(ErrorCode::NotFound, format!("unknown split {split:?}")))?;
        if members.is_empty() {
            return Err(ServiceError::new(
                ErrorCode::NotFound,
                format!("split {split:?} is empty"),
            ));
        }
        let assignments = self.assignments.lock().expect("assignments lock");
        let chosen = members
            .iter()
            .min_by_key(|seq| {
                assignments
                    .get(&(token.to_owned(), (*seq).clone()))
                    .copied()
                    .unwrap_or(0)
            })
            .expect("nonempty split");
        Ok(chosen.clone())
    }

    pub fn open(&self, token: &str, target: OpenTarget<'_>) -> Result<Opened, ServiceError> {
        if self.config.max_open_sessions > 0
            && self.open_session_count(token) >= self.config.max_open_sessions
        {
            return Err(ServiceError::new(
                ErrorCode::Quota,
                format!(
                    "token has {} open sessions (limit {})",
                    self.open_session_count(token),
                    self.config.max_open_sessions
                ),
            ));
        }
        let sequence = match target {
            OpenTarget::Sequence(name) => {
                self.repo.meta(name)?;
                name.to_owned()
            }
            OpenTarget::Split(name) => self.pick_from_split(token, name)?,
        };
        let meta = self.repo.meta(&sequence)?.clone();
        let gt = Arc::new(self.repo.load_ground_truth(&sequence)?);
        let pool = self.repo.load_scribble_pool(&sequence)?;

        let id = uuid::Uuid::new_v4().to_string();
        let mut session_config = SessionConfig::new(id.clone(), sequence.clone(), meta.objects.clone())?;
        session_config.max_interactions = self.config.max_interactions;
        session_config.wall_budget_s = self.config.wall_budget_s;
        session_config.tolerance = self.config.tolerance;
        session_config.robot = self.config.robot;
        session_config.cost_model = self.config.cost_model;

        let state = SessionState::open(session_config, gt, pool)?;
        let header = LogHeader::new(state.config(), state.frames(), state.size(), self.config.track);
        let log = LogWriter::create(&self.sessions_path(&id), &header)?;
        let owner = OwnerRecord {
            token: token.to_owned(),
            sequence: sequence.clone(),
        };
        let owner_bytes =
            serde_json::to_vec(&owner).map_err(|e| ServiceError::new(ErrorCode::Internal, e.to_string()))?;
        std::fs::write(self.meta_path(&id), owner_bytes)
            .map_err(|e| ServiceError::new(ErrorCode::Internal, e.to_string()))?;

        let entry = Arc::new(SessionEntry {
            token: token.to_owned(),
            sequence: sequence.clone(),
            frames: meta.frames,
            size: meta.size,
            closed: AtomicBool::new(false),
            slot: Mutex::new(Slot { state, log }),
        });
        self.sessions
            .lock()
            .expect("sessions lock")
            .insert(id.clone(), Arc::clone(&entry));
        *self
            .assignments
            .lock()
            .expect("assignments lock")
            .entry((token.to_owned(), sequence.clone()))
            .or_insert(0) += 1;

        // the clock anchor starts here, as close to the transport handoff
        // as this process can observe
        let mut slot = entry.slot.lock().expect("fresh session slot");
        let set = slot.state.deliver_scribbles()?;
        let scribbles = to_wire(&set, meta.frames);
        Ok(Opened {
            session_id: id,
            sequence,
            frames: meta.frames,
            size: meta.size,
            objects: meta.objects,
            scribbles,
        })
    }

    fn entry(&self, token: &str, id: &str) -> Result<Arc<SessionEntry>, ServiceError> {
        let sessions = self.sessions.lock().expect("sessions lock");
        let entry = sessions.get(id).ok_or_else(ServiceError::not_found)?;
        if entry.token != token {
            return Err(ServiceError::not_found());
        }
        Ok(Arc::clone(entry))
    }

    pub fn submit(
        &self,
        token: &str,
        id: &str,
        wire: &WirePrediction,
    ) -> Result<TurnReply, ServiceError> {
        let entry = self.entry(token, id)?;
        if wire.masks.len() != entry.frames {
            return Err(format_err(format!(
                "prediction covers {} frames, sequence has {}",
                wire.masks.len(),
                entry.frames
            )));
        }
        let masks = decode_prediction(wire, entry.size)?;
        let mut slot = match entry.slot.try_lock() {
            Ok(slot) => slot,
            Err(TryLockError::WouldBlock) => {
                return Err(ServiceError::new(
                    ErrorCode::Busy,
                    "another request is in flight for this session",
                ))
            }
            Err(TryLockError::Poisoned(e)) => {
                return Err(ServiceError::new(ErrorCode::Internal, e.to_string()))
            }
        };
        let slot = &mut *slot;
        let (state, log) = (&mut slot.state, &mut slot.log);
        let outcome = state.submit_prediction(&masks)?;
        let record = state
            .interactions()
            .last()
            .expect("submission just recorded");
        log.record(record)?;
        match outcome {
            TurnOutcome::Continue => {
                let set = state.deliver_scribbles()?;
                Ok(TurnReply::Scribbles(to_wire(&set, entry.frames)))
            }
            TurnOutcome::Closed(reason) => {
                log.close(reason, state.cumulative_s(), state.interactions().len())?;
                let report = session_report(
                    id,
                    &entry.sequence,
                    entry.frames,
                    entry.size,
                    &state.config().objects,
                    reason,
                    state.quality_curve(),
                    &self.config.track,
                )?;
                let mut bytes = serde_json::to_vec_pretty(&report)
                    .map_err(|e| ServiceError::new(ErrorCode::Internal, e.to_string()))?;
                bytes.push(b'\n');
                std::fs::write(self.report_path(id), &bytes)
                    .map_err(|e| ServiceError::new(ErrorCode::Internal, e.to_string()))?;
                entry.closed.store(true, Ordering::Release);
                Ok(TurnReply::Report(Box::new(report)))
            }
        }
    }

    /// Raw bytes of the persisted report, exactly as written at closure.
    pub fn report_bytes(&self, token: &str, id: &str) -> Result<Vec<u8>, ServiceError> {
        let live = {
            let sessions = self.sessions.lock().expect("sessions lock");
            sessions.get(id).cloned()
        };
        match live {
            Some(entry) => {
                if entry.token != token {
                    return Err(ServiceError::not_found());
                }
                if !entry.closed.load(Ordering::Acquire) {
                    return Err(ServiceError::new(
                        ErrorCode::Phase,
                        "session is still open",
                    ));
                }
            }
            None => {
                // not in memory: fall back to the ownership record written
                // at open, which survives restarts
                let meta = std::fs::read(self.meta_path(id)).map_err(|_| ServiceError::not_found())?;
                let owner: OwnerRecord = serde_json::from_slice(&meta)
                    .map_err(|e| ServiceError::new(ErrorCode::Internal, e.to_string()))?;
                if owner.token != token {
                    return Err(ServiceError::not_found());
                }
            }
        }
        match std::fs::read(self.report_path(id)) {
            Ok(bytes) => Ok(bytes),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(ServiceError::new(
                ErrorCode::Phase,
                "session never reached closure",
            )),
            Err(e) => Err(ServiceError::new(ErrorCode::Internal, e.to_string())),
        }
    }
}
