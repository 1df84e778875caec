//! Line-oriented session logs. One JSON object per line: an `open` header,
//! one `record` per interaction, and a final `close`. Lines are flushed as
//! they happen so a crashed run still leaves a readable prefix.

use super::curve::{
    session_report, CurvePoint, QualityTimeCurve, SessionReport, TrackParams,
};
use super::{CloseReason, InteractionRecord, SessionConfig, SessionError};
use crate::metrics::BoundaryTolerance;
use crate::raster::RasterSize;
use crate::robot::{AnnotationCostModel, RobotParams};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("log io on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("log line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("malformed session log: {0}")]
    Malformed(String),
    #[error(transparent)]
    Session(#[from] SessionError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub session_id: String,
    pub sequence: String,
    pub frames: usize,
    pub width: u32,
    pub height: u32,
    pub objects: Vec<u8>,
    pub max_interactions: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_budget_s: Option<f64>,
    pub tolerance: BoundaryTolerance,
    pub robot: RobotParams,
    pub cost_model: AnnotationCostModel,
    pub track: TrackParams,
}

impl LogHeader {
    pub fn new(
        config: &SessionConfig,
        frames: usize,
        size: RasterSize,
        track: TrackParams,
    ) -> LogHeader {
        LogHeader {
            session_id: config.session_id.clone(),
            sequence: config.sequence.clone(),
            frames,
            width: size.width(),
            height: size.height(),
            objects: config.objects.clone(),
            max_interactions: config.max_interactions,
            wall_budget_s: config.wall_budget_s,
            tolerance: config.tolerance,
            robot: config.robot,
            cost_model: config.cost_model,
            track,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub index: usize,
    pub annotation_s: f64,
    pub compute_s: f64,
    pub cumulative_s: f64,
    pub overall: f64,
    pub per_object: BTreeMap<u8, f64>,
}

impl From<&InteractionRecord> for LogRecord {
    fn from(r: &InteractionRecord) -> LogRecord {
        LogRecord {
            index: r.index,
            annotation_s: r.annotation_s,
            compute_s: r.compute_s,
            cumulative_s: r.cumulative_s,
            overall: r.overall,
            per_object: r.per_object.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloseLine {
    pub reason: CloseReason,
    pub cumulative_s: f64,
    pub interactions: usize,
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum LogLine {
    Open(LogHeader),
    Record(LogRecord),
    Close(CloseLine),
}

pub struct LogWriter {
    out: BufWriter<File>,
    path: PathBuf,
}

impl LogWriter {
    pub fn create(path: &Path, header: &LogHeader) -> Result<LogWriter, LogError> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|source| LogError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
        }
        let file = File::create(path).map_err(|source| LogError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut w = LogWriter {
            out: BufWriter::new(file),
            path: path.to_path_buf(),
        };
        w.line(&LogLine::Open(header.clone()))?;
        Ok(w)
    }

    fn line(&mut self, line: &LogLine) -> Result<(), LogError> {
        let text = serde_json::to_string(line)
            .map_err(|e| LogError::Malformed(format!("serializing log line: {e}")))?;
        let io = |source| LogError::Io {
            path: self.path.clone(),
            source,
        };
        self.out.write_all(text.as_bytes()).map_err(io)?;
        self.out.write_all(b"\n").map_err(io)?;
        self.out.flush().map_err(io)
    }

    pub fn record(&mut self, record: &InteractionRecord) -> Result<(), LogError> {
        self.line(&LogLine::Record(record.into()))
    }

    pub fn close(
        &mut self,
        reason: CloseReason,
        cumulative_s: f64,
        interactions: usize,
    ) -> Result<(), LogError> {
        self.line(&LogLine::Close(CloseLine {
            reason,
            cumulative_s,
            interactions,
        }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoggedSession {
    pub header: LogHeader,
    pub records: Vec<LogRecord>,
    /// None when the log ends mid-session.
    pub close: Option<CloseLine>,
}

pub fn read_session_log(path: &Path) -> Result<LoggedSession, LogError> {
    let file = File::open(path).map_err(|source| LogError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut header: Option<LogHeader> = None;
    let mut records: Vec<LogRecord> = Vec::new();
    let mut close: Option<CloseLine> = None;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let n = i + 1;
        let fail = |message: String| LogError::Line { line: n, message };
        let line = line.map_err(|source| LogError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        // parsed by hand rather than through the tagged enum: buffered enum
        // content loses the string-to-integer coercion that per_object's
        // u8 map keys need
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| fail(format!("bad json: {e}")))?;
        let kind = value
            .get("kind")
            .and_then(|k| k.as_str())
            .ok_or_else(|| fail("missing kind".into()))?
            .to_owned();
        if close.is_some() {
            return Err(fail("line after close".into()));
        }
        match kind.as_str() {
            "open" => {
                if header.is_some() {
                    return Err(fail("second open line".into()));
                }
                let h: LogHeader = serde_json::from_value(value)
                    .map_err(|e| fail(format!("bad open line: {e}")))?;
                header = Some(h);
            }
            "record" => {
                if header.is_none() {
                    return Err(fail("record before open".into()));
                }
                let r: LogRecord = serde_json::from_value(value)
                    .map_err(|e| fail(format!("bad record line: {e}")))?;
                if r.index != records.len() + 1 {
                    return Err(fail(format!(
                        "record index {} where {} was expected",
                        r.index,
                        records.len() + 1
                    )));
                }
                records.push(r);
            }
            "close" => {
                if header.is_none() {
                    return Err(fail("close before open".into()));
                }
                let c: CloseLine = serde_json::from_value(value)
                    .map_err(|e| fail(format!("bad close line: {e}")))?;
                close = Some(c);
            }
            other => return Err(fail(format!("unknown line kind {other:?}"))),
        }
    }
    let header = header.ok_or_else(|| LogError::Malformed("log has no open line".into()))?;
    Ok(LoggedSession {
        header,
        records,
        close,
    })
}

pub fn rebuild_curve(log: &LoggedSession) -> Result<QualityTimeCurve, LogError> {
    let points = log
        .records
        .iter()
        .map(|r| CurvePoint {
            time_s: r.cumulative_s,
            value: r.overall,
        })
        .collect();
    let mut per_object = BTreeMap::new();
    for &object in &log.header.objects {
        let mut series = Vec::with_capacity(log.records.len());
        for r in &log.records {
            let v = r.per_object.get(&object).ok_or_else(|| {
                LogError::Malformed(format!(
                    "record {} has no score for object {object}",
                    r.index
                ))
            })?;
            series.push(CurvePoint {
                time_s: r.cumulative_s,
                value: *v,
            });
        }
        per_object.insert(object, series);
    }
    Ok(QualityTimeCurve { points, per_object })
}

/// Rebuild the full report from a finished log. Fails on logs that were
/// cut off before their close line.
pub fn rebuild_report(log: &LoggedSession) -> Result<SessionReport, LogError> {
    let close = log
        .close
        .ok_or_else(|| LogError::Malformed("log has no close line".into()))?;
    let size = RasterSize::new(log.header.width, log.header.height)
        .map_err(|e| LogError::Malformed(format!("bad frame size in header: {e}")))?;
    let curve = rebuild_curve(log)?;
    Ok(session_report(
        &log.header.session_id,
        &log.header.sequence,
        log.header.frames,
        size,
        &log.header.objects,
        close.reason,
        curve,
        &log.header.track,
    )?)
}
