//! Quality-over-time bookkeeping: step curves, the fixed annotation
//! budget, per-object time-to-threshold, and cross-session aggregation.

use super::{CloseReason, SessionError};
use crate::raster::RasterSize;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub time_s: f64,
    pub value: f64,
}

/// Piecewise-constant quality trace. A session's quality at time t is the
/// value of its latest interaction at or before t, and 0.0 before the
/// first one.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct QualityTimeCurve {
    pub points: Vec<CurvePoint>,
    pub per_object: BTreeMap<u8, Vec<CurvePoint>>,
}

fn step_value(points: &[CurvePoint], t: f64) -> f64 {
    let mut v = 0.0;
    for p in points {
        if p.time_s <= t {
            v = p.value;
        } else {
            break;
        }
    }
    v
}

impl QualityTimeCurve {
    pub fn value_at(&self, t: f64) -> f64 {
        step_value(&self.points, t)
    }

    pub fn object_value_at(&self, object: u8, t: f64) -> f64 {
        self.per_object
            .get(&object)
            .map_or(0.0, |pts| step_value(pts, t))
    }

    pub fn last_time_s(&self) -> Option<f64> {
        self.points.last().map(|p| p.time_s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackParams {
    /// Seconds of budget granted per frame per object.
    pub budget_rate_s: f64,
    /// Quality bar for the timing track.
    pub threshold: f64,
    /// Seconds charged to an object that never reaches the bar.
    pub cap_s: f64,
    /// Sampling step for aggregated curves.
    pub grid_step_s: f64,
}

impl Default for TrackParams {
    fn default() -> Self {
        TrackParams {
            budget_rate_s: 5.0,
            threshold: 0.60,
            cap_s: 300.0,
            grid_step_s: 1.0,
        }
    }
}

impl TrackParams {
    pub fn validate(&self) -> Result<(), SessionError> {
        let bad = |msg: &str, v: f64| SessionError::BadTrackParam(format!("{msg} ({v})"));
        if !(self.budget_rate_s.is_finite() && self.budget_rate_s > 0.0) {
            return Err(bad("budget rate must be positive", self.budget_rate_s));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(bad("threshold must lie in (0, 1]", self.threshold));
        }
        if !(self.cap_s.is_finite() && self.cap_s > 0.0) {
            return Err(bad("cap must be positive", self.cap_s));
        }
        if !(self.grid_step_s.is_finite() && self.grid_step_s > 0.0) {
            return Err(bad("grid step must be positive", self.grid_step_s));
        }
        Ok(())
    }
}

/// Budget for a sequence scales with its size: rate x frames x objects.
pub fn quality_budget_s(params: &TrackParams, frames: usize, objects: usize) -> f64 {
    params.budget_rate_s * frames as f64 * objects as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedSummary {
    pub total_s: f64,
    pub per_object_s: BTreeMap<u8, f64>,
    /// Objects that never reached the threshold; each contributed `cap_s`.
    pub unreached: Vec<u8>,
}

/// First time each object's quality reaches the threshold, capped for
/// objects that never do.
pub fn time_to_quality(
    curve: &QualityTimeCurve,
    threshold: f64,
    cap_s: f64,
) -> Result<SpeedSummary, SessionError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(SessionError::BadTrackParam(format!(
            "threshold must lie in (0, 1] ({threshold})"
        )));
    }
    if curve.per_object.is_empty() {
        return Err(SessionError::NoRecords);
    }
    let mut per_object_s = BTreeMap::new();
    let mut unreached = Vec::new();
    let mut total = 0.0;
    for (&object, points) in &curve.per_object {
        let t = match points.iter().find(|p| p.value >= threshold) {
            Some(p) => p.time_s,
            None => {
                unreached.push(object);
                cap_s
            }
        };
        per_object_s.insert(object, t);
        total += t;
    }
    Ok(SpeedSummary {
        total_s: total,
        per_object_s,
        unreached,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSummary {
    pub budget_s: f64,
    pub quality_at_budget: f64,
    pub threshold: f64,
    pub cap_s: f64,
    pub speed_total_s: f64,
    pub speed_per_object_s: BTreeMap<u8, f64>,
    pub speed_unreached: Vec<u8>,
}

pub fn track_summary(
    curve: &QualityTimeCurve,
    frames: usize,
    objects: usize,
    params: &TrackParams,
) -> Result<TrackSummary, SessionError> {
    params.validate()?;
    if curve.points.is_empty() {
        return Err(SessionError::NoRecords);
    }
    let budget_s = quality_budget_s(params, frames, objects);
    let speed = time_to_quality(curve, params.threshold, params.cap_s)?;
    Ok(TrackSummary {
        budget_s,
        quality_at_budget: curve.value_at(budget_s),
        threshold: params.threshold,
        cap_s: params.cap_s,
        speed_total_s: speed.total_s,
        speed_per_object_s: speed.per_object_s,
        speed_unreached: speed.unreached,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub session_id: String,
    pub sequence: String,
    pub frames: usize,
    pub width: u32,
    pub height: u32,
    pub objects: Vec<u8>,
    pub close_reason: CloseReason,
    pub interactions: usize,
    pub curve: QualityTimeCurve,
    pub summary: TrackSummary,
}

#[allow(clippy::too_many_arguments)]
pub fn session_report(
    session_id: &str,
    sequence: &str,
    frames: usize,
    size: RasterSize,
    objects: &[u8],
    close_reason: CloseReason,
    curve: QualityTimeCurve,
    params: &TrackParams,
) -> Result<SessionReport, SessionError> {
    let summary = track_summary(&curve, frames, objects.len(), params)?;
    Ok(SessionReport {
        session_id: session_id.to_owned(),
        sequence: sequence.to_owned(),
        frames,
        width: size.width(),
        height: size.height(),
        objects: objects.to_vec(),
        close_reason,
        interactions: curve.points.len(),
        curve,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub sessions: usize,
    /// Mean over sessions of quality at each session's own budget.
    pub mean_quality_at_budget: f64,
    /// Sum over sessions of per-object time to threshold.
    pub total_speed_s: f64,
    pub total_unreached_objects: usize,
    /// Mean quality over sessions sampled on a shared time grid.
    pub grid: Vec<CurvePoint>,
}

pub fn aggregate_report(
    reports: &[SessionReport],
    grid_step_s: f64,
) -> Result<AggregateReport, SessionError> {
    if reports.is_empty() {
        return Err(SessionError::NoRecords);
    }
    if !(grid_step_s.is_finite() && grid_step_s > 0.0) {
        return Err(SessionError::BadTrackParam(format!(
            "grid step must be positive ({grid_step_s})"
        )));
    }
    let mut max_t: f64 = 0.0;
    for r in reports {
        let last = r.curve.last_time_s().ok_or(SessionError::NoRecords)?;
        max_t = max_t.max(last);
    }
    let steps = (max_t / grid_step_s).ceil() as usize;
    let n = reports.len() as f64;
    let grid = (0..=steps)
        .map(|i| {
            let t = i as f64 * grid_step_s;
            let mean = reports.iter().map(|r| r.curve.value_at(t)).sum::<f64>() / n;
            CurvePoint { time_s: t, value: mean }
        })
        .collect();
    Ok(AggregateReport {
        sessions: reports.len(),
        mean_quality_at_budget: reports
            .iter()
            .map(|r| r.summary.quality_at_budget)
            .sum::<f64>()
            / n,
        total_speed_s: reports.iter().map(|r| r.summary.speed_total_s).sum(),
        total_unreached_objects: reports
            .iter()
            .map(|r| r.summary.speed_unreached.len())
            .sum(),
        grid,
    })
}
