//! One interactive evaluation session: scribbles go out, predictions come
//! back, every interaction is scored and priced in seconds.

pub mod curve;
pub mod log;

use crate::metrics::{
    evaluate_sequence, worst_frame, BoundaryTolerance, MetricsError, SequenceScoreTable,
};
use crate::raster::{LabelMask, RasterSize};
use crate::robot::{
    bootstrap_initial_scribbles, estimate_annotation_time, generate_scribbles,
    AnnotationCostModel, RobotError, RobotParams, ScribbleSet,
};
use curve::{CurvePoint, QualityTimeCurve};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("wrong phase: {0}")]
    Phase(&'static str),
    #[error("prediction covers {got} frames, sequence has {want}")]
    FrameCount { want: usize, got: usize },
    #[error("prediction uses undeclared object id {0}")]
    UnknownLabel(u8),
    #[error("compute time {0} is not a finite non-negative number")]
    BadCompute(f64),
    #[error("no objects declared")]
    NoObjects,
    #[error("config invalid: {0}")]
    BadConfig(&'static str),
    #[error("ground truth is empty or inconsistently sized")]
    BadGroundTruth,
    #[error("initial scribbles reference frame {frame}, sequence has {frames}")]
    PoolFrame { frame: usize, frames: usize },
    #[error("no initial annotation could be produced")]
    NoInitialAnnotation,
    #[error("track parameter out of range: {0}")]
    BadTrackParam(String),
    #[error("session has no interactions")]
    NoRecords,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Robot(#[from] RobotError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub session_id: String,
    pub sequence: String,
    /// Ascending distinct object ids under evaluation.
    pub objects: Vec<u8>,
    pub max_interactions: usize,
    /// Optional hard cap on cumulative session seconds.
    pub wall_budget_s: Option<f64>,
    pub tolerance: BoundaryTolerance,
    pub robot: RobotParams,
    pub cost_model: AnnotationCostModel,
}

impl SessionConfig {
    pub fn new(
        session_id: impl Into<String>,
        sequence: impl Into<String>,
        objects: Vec<u8>,
    ) -> Result<Self, SessionError> {
        let mut objects = objects;
        objects.sort_unstable();
        objects.dedup();
        objects.retain(|&o| o != 0);
        if objects.is_empty() {
            return Err(SessionError::NoObjects);
        }
        Ok(Self {
            session_id: session_id.into(),
            sequence: sequence.into(),
            objects,
            max_interactions: 8,
            wall_budget_s: None,
            tolerance: BoundaryTolerance::default(),
            robot: RobotParams::default(),
            cost_model: AnnotationCostModel::default(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Scribbles are staged; the client has not fetched them yet.
    AwaitingScribblePickup,
    AwaitingPrediction,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloseReason {
    /// The robot found nothing left to correct.
    ErrorFree,
    MaxInteractions,
    WallBudget,
}

/// One scored prediction turn.
#[derive(Debug, Clone)]
pub struct InteractionRecord {
    /// 1-based turn number.
    pub index: usize,
    /// Seconds charged for drawing the scribbles that enabled this turn.
    pub annotation_s: f64,
    /// Seconds between scribble pickup and prediction arrival.
    pub compute_s: f64,
    /// Running total of annotation and compute seconds.
    pub cumulative_s: f64,
    pub overall: f64,
    pub per_object: BTreeMap<u8, f64>,
    pub table: SequenceScoreTable,
}

#[derive(Debug)]
pub enum TurnOutcome {
    /// More scribbles staged; fetch them with `deliver_scribbles`.
    Continue,
    Closed(CloseReason),
}

struct Pending {
    set: ScribbleSet,
    annotation_s: f64,
}

pub struct SessionState {
    config: SessionConfig,
    gt: Arc<Vec<LabelMask>>,
    size: RasterSize,
    phase: Phase,
    history: Vec<InteractionRecord>,
    pending: Option<Pending>,
    staged_annotation_s: f64,
    anchor: Option<Instant>,
    initial_frames: BTreeSet<usize>,
    close_reason: Option<CloseReason>,
    cumulative_s: f64,
}

impl SessionState {
    /// Open a session. The first scribbles come from the recorded pool when
    /// one is given; otherwise the robot bootstraps an annotation on the
    /// frame where the declared objects are largest (summed pixel area,
    /// ties to the lowest index). Pool annotation is charged by its
    /// recorded stroke times when every stroke carries them, by the cost
    /// model otherwise.
    pub fn open(
        config: SessionConfig,
        gt: Arc<Vec<LabelMask>>,
        pool: Option<ScribbleSet>,
    ) -> Result<SessionState, SessionError> {
        if config.objects.is_empty() {
            return Err(SessionError::NoObjects);
        }
        if config.max_interactions == 0 {
            return Err(SessionError::BadConfig("max_interactions must be at least 1"));
        }
        let size = match gt.first() {
            Some(first) => first.size(),
            None => return Err(SessionError::BadGroundTruth),
        };
        if gt.iter().any(|m| m.size() != size) {
            return Err(SessionError::BadGroundTruth);
        }
        let frames = gt.len();
        let (set, annotation_s, initial_frames) = match pool {
            Some(mut pool) if !pool.is_empty() => {
                if let Some(&frame) = pool.frames().iter().find(|&&f| f >= frames) {
                    return Err(SessionError::PoolFrame { frame, frames });
                }
                pool.sequence = config.sequence.clone();
                let annotation = pool
                    .recorded_time_s()
                    .unwrap_or_else(|| estimate_annotation_time(&pool, &config.cost_model));
                let frames = pool.frames();
                (pool, annotation, frames)
            }
            _ => {
                let frame = Self::bootstrap_frame(&gt, &config.objects);
                let set = bootstrap_initial_scribbles(
                    &gt[frame],
                    frame,
                    &config.objects,
                    &config.robot,
                    &config.sequence,
                )?;
                if set.is_empty() {
                    return Err(SessionError::NoInitialAnnotation);
                }
                let annotation = estimate_annotation_time(&set, &config.cost_model);
                (set, annotation, [frame].into_iter().collect())
            }
        };
        Ok(SessionState {
            config,
            gt,
            size,
            phase: Phase::AwaitingScribblePickup,
            history: Vec::new(),
            pending: Some(Pending { set, annotation_s }),
            staged_annotation_s: 0.0,
            anchor: None,
            initial_frames,
            close_reason: None,
            cumulative_s: 0.0,
        })
    }

    fn bootstrap_frame(gt: &[LabelMask], objects: &[u8]) -> usize {
        let mut best = 0usize;
        let mut best_area = 0usize;
        for (i, mask) in gt.iter().enumerate() {
            let area: usize = objects.iter().map(|&o| mask.area(o)).sum();
            // strictly greater keeps the lowest index on ties
            if area > best_area {
                best_area = area;
                best = i;
            }
        }
        best
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn close_reason(&self) -> Option<CloseReason> {
        self.close_reason
    }

    pub fn frames(&self) -> usize {
        self.gt.len()
    }

    pub fn size(&self) -> RasterSize {
        self.size
    }

    pub fn interactions(&self) -> &[InteractionRecord] {
        &self.history
    }

    pub fn cumulative_s(&self) -> f64 {
        self.cumulative_s
    }

    /// Hand the staged scribbles out and start the turn clock. The seconds
    /// between this call and the next `submit_prediction` are that turn's
    /// compute time.
    pub fn deliver_scribbles(&mut self) -> Result<ScribbleSet, SessionError> {
        match self.phase {
            Phase::AwaitingScribblePickup => {}
            Phase::AwaitingPrediction => {
                return Err(SessionError::Phase("scribbles already delivered"))
            }
            Phase::Closed => return Err(SessionError::Phase("session closed")),
        }
        let pending = self.pending.take().expect("pickup phase stages scribbles");
        self.staged_annotation_s = pending.annotation_s;
        self.phase = Phase::AwaitingPrediction;
        self.anchor = Some(Instant::now());
        Ok(pending.set)
    }

    /// Score a prediction, measuring compute time from the pickup anchor.
    pub fn submit_prediction(&mut self, masks: &[LabelMask]) -> Result<TurnOutcome, SessionError> {
        let elapsed = match (self.phase, &self.anchor) {
            (Phase::AwaitingPrediction, Some(anchor)) => anchor.elapsed().as_secs_f64(),
            (Phase::AwaitingScribblePickup, _) => {
                return Err(SessionError::Phase("scribbles not picked up"))
            }
            (Phase::Closed, _) => return Err(SessionError::Phase("session closed")),
            (Phase::AwaitingPrediction, None) => unreachable!("anchor set at delivery"),
        };
        self.submit_prediction_with_elapsed(masks, elapsed)
    }

    /// Same as [`submit_prediction`] but with the compute seconds supplied
    /// by the caller; drivers that replay or pin timing use this.
    ///
    /// Validation is atomic: any error leaves the session exactly as it
    /// was.
    pub fn submit_prediction_with_elapsed(
        &mut self,
        masks: &[LabelMask],
        compute_s: f64,
    ) -> Result<TurnOutcome, SessionError> {
        match self.phase {
            Phase::AwaitingPrediction => {}
            Phase::AwaitingScribblePickup => {
                return Err(SessionError::Phase("scribbles not picked up"))
            }
            Phase::Closed => return Err(SessionError::Phase("session closed")),
        }
        if !compute_s.is_finite() || compute_s < 0.0 {
            return Err(SessionError::BadCompute(compute_s));
        }
        if masks.len() != self.gt.len() {
            return Err(SessionError::FrameCount {
                want: self.gt.len(),
                got: masks.len(),
            });
        }
        for mask in masks {
            if mask.size() != self.size {
                return Err(SessionError::Metrics(MetricsError::SizeMismatch {
                    pred: mask.size(),
                    gt: self.size,
                }));
            }
            if let Some(&bad) = mask
                .as_slice()
                .iter()
                .find(|&&l| l != 0 && !self.config.objects.contains(&l))
            {
                return Err(SessionError::UnknownLabel(bad));
            }
        }
        let table = evaluate_sequence(masks, &self.gt, &self.config.objects, self.config.tolerance)?;
        // everything can still fail up to here; mutate only after the robot
        // has run too
        let worst = worst_frame(&table, &self.initial_frames)?;
        let next = generate_scribbles(
            &masks[worst],
            &self.gt[worst],
            worst,
            &self.config.objects,
            &self.config.robot,
            &self.config.sequence,
        )?;
        let per_object: BTreeMap<u8, f64> = self
            .config
            .objects
            .iter()
            .map(|&o| (o, table.object_mean(o).expect("object in table")))
            .collect();
        let annotation_s = self.staged_annotation_s;
        self.cumulative_s += annotation_s + compute_s;
        self.anchor = None;
        self.staged_annotation_s = 0.0;
        self.history.push(InteractionRecord {
            index: self.history.len() + 1,
            annotation_s,
            compute_s,
            cumulative_s: self.cumulative_s,
            overall: table.overall_mean(),
            per_object,
            table,
        });
        let reason = if next.is_empty() {
            Some(CloseReason::ErrorFree)
        } else if self.history.len() >= self.config.max_interactions {
            Some(CloseReason::MaxInteractions)
        } else if self
            .config
            .wall_budget_s
            .is_some_and(|b| self.cumulative_s >= b)
        {
            Some(CloseReason::WallBudget)
        } else {
            None
        };
        match reason {
            Some(reason) => {
                self.phase = Phase::Closed;
                self.close_reason = Some(reason);
                self.pending = None;
                Ok(TurnOutcome::Closed(reason))
            }
            None => {
                let annotation_s = estimate_annotation_time(&next, &self.config.cost_model);
                self.pending = Some(Pending {
                    set: next,
                    annotation_s,
                });
                self.phase = Phase::AwaitingScribblePickup;
                Ok(TurnOutcome::Continue)
            }
        }
    }

    /// Quality over cumulative seconds, overall and per object, one point
    /// per interaction.
    pub fn quality_curve(&self) -> QualityTimeCurve {
        let points: Vec<CurvePoint> = self
            .history
            .iter()
            .map(|r| CurvePoint {
                time_s: r.cumulative_s,
                value: r.overall,
            })
            .collect();
        let per_object = self
            .config
            .objects
            .iter()
            .map(|&o| {
                let series = self
                    .history
                    .iter()
                    .map(|r| CurvePoint {
                        time_s: r.cumulative_s,
                        value: r.per_object[&o],
                    })
                    .collect();
                (o, series)
            })
            .collect();
        QualityTimeCurve { points, per_object }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::RasterSize;
    use crate::robot::{Scribble, ScribbleKind};

    fn size16() -> RasterSize {
        RasterSize::new(16, 16).unwrap()
    }

    fn gt_with_block(id: u8, x0: u32, w: u32) -> LabelMask {
        let mut m = LabelMask::new(size16());
        for y in 4..10 {
            for x in x0..x0 + w {
                m.set(x, y, id);
            }
        }
        m
    }

    fn two_frame_gt() -> Arc<Vec<LabelMask>> {
        Arc::new(vec![gt_with_block(1, 2, 6), gt_with_block(1, 5, 6)])
    }

    fn config() -> SessionConfig {
        SessionConfig::new("sess", "seq", vec![1]).unwrap()
    }

    #[test]
    fn config_normalizes_objects() {
        let c = SessionConfig::new("s", "q", vec![2, 1, 2, 0]).unwrap();
        assert_eq!(c.objects, vec![1, 2]);
        assert!(SessionConfig::new("s", "q", vec![0]).is_err());
    }

    #[test]
    fn open_bootstraps_and_first_turn_scores() {
        let mut s = SessionState::open(config(), two_frame_gt(), None).unwrap();
        assert_eq!(s.phase(), Phase::AwaitingScribblePickup);
        let set = s.deliver_scribbles().unwrap();
        assert!(!set.is_empty());
        assert!(set.scribbles.iter().all(|x| x.kind == ScribbleKind::Bootstrap));
        assert_eq!(s.phase(), Phase::AwaitingPrediction);

        // perfect prediction closes immediately
        let gt = two_frame_gt();
        let outcome = s
            .submit_prediction_with_elapsed(&gt, 0.25)
            .unwrap();
        assert!(matches!(outcome, TurnOutcome::Closed(CloseReason::ErrorFree)));
        assert_eq!(s.phase(), Phase::Closed);
        let rec = &s.interactions()[0];
        assert_eq!(rec.index, 1);
        assert_eq!(rec.overall, 1.0);
        assert!(rec.annotation_s > 0.0);
        assert_eq!(rec.cumulative_s, rec.annotation_s + 0.25);
    }

    #[test]
    fn empty_prediction_keeps_the_loop_going() {
        let mut s = SessionState::open(config(), two_frame_gt(), None).unwrap();
        s.deliver_scribbles().unwrap();
        let blank = vec![LabelMask::new(size16()), LabelMask::new(size16())];
        let outcome = s.submit_prediction_with_elapsed(&blank, 0.5).unwrap();
        assert!(matches!(outcome, TurnOutcome::Continue));
        assert_eq!(s.phase(), Phase::AwaitingScribblePickup);
        let next = s.deliver_scribbles().unwrap();
        assert_eq!(next.frames().len(), 1, "corrections target one frame");
        assert!(next.scribbles.iter().all(|x| x.kind == ScribbleKind::Simulated));
    }

    #[test]
    fn worst_frame_skips_the_initial_annotation_frame() {
        // frame 0 bootstraps; a prediction wrong only on frame 0 must still
        // pick frame 1? no: frame 0 is excluded, frame 1 is perfect, but the
        // robot still corrects the worst non-initial frame (frame 1), finds
        // nothing, and closes error-free.
        let gt = two_frame_gt();
        let mut s = SessionState::open(config(), gt.clone(), None).unwrap();
        s.deliver_scribbles().unwrap();
        let masks = vec![LabelMask::new(size16()), gt[1].clone()];
        let outcome = s.submit_prediction_with_elapsed(&masks, 0.1).unwrap();
        assert!(matches!(outcome, TurnOutcome::Closed(CloseReason::ErrorFree)));
    }

    #[test]
    fn cumulative_time_is_a_running_sum() {
        let gt = two_frame_gt();
        let mut s = SessionState::open(config(), gt.clone(), None).unwrap();
        s.deliver_scribbles().unwrap();
        let blank = vec![LabelMask::new(size16()), LabelMask::new(size16())];
        s.submit_prediction_with_elapsed(&blank, 0.5).unwrap();
        let first_annotation = s.interactions()[0].annotation_s;
        s.deliver_scribbles().unwrap();
        s.submit_prediction_with_elapsed(&gt, 0.25).unwrap();
        let recs = s.interactions();
        assert_eq!(recs[0].cumulative_s, first_annotation + 0.5);
        assert_eq!(
            recs[1].cumulative_s,
            recs[0].cumulative_s + recs[1].annotation_s + 0.25
        );
        assert!(recs[1].annotation_s > 0.0);
    }

    #[test]
    fn max_interactions_closes_the_session() {
        let mut cfg = config();
        cfg.max_interactions = 2;
        let mut s = SessionState::open(cfg, two_frame_gt(), None).unwrap();
        let blank = vec![LabelMask::new(size16()), LabelMask::new(size16())];
        s.deliver_scribbles().unwrap();
        assert!(matches!(
            s.submit_prediction_with_elapsed(&blank, 0.1).unwrap(),
            TurnOutcome::Continue
        ));
        s.deliver_scribbles().unwrap();
        let outcome = s.submit_prediction_with_elapsed(&blank, 0.1).unwrap();
        assert!(matches!(
            outcome,
            TurnOutcome::Closed(CloseReason::MaxInteractions)
        ));
    }

    #[test]
    fn wall_budget_closes_the_session() {
        let mut cfg = config();
        cfg.wall_budget_s = Some(1.0);
        let mut s = SessionState::open(cfg, two_frame_gt(), None).unwrap();
        s.deliver_scribbles().unwrap();
        let blank = vec![LabelMask::new(size16()), LabelMask::new(size16())];
        let outcome = s.submit_prediction_with_elapsed(&blank, 5.0).unwrap();
        assert!(matches!(
            outcome,
            TurnOutcome::Closed(CloseReason::WallBudget)
        ));
    }

    #[test]
    fn phase_violations_are_rejected() {
        let mut s = SessionState::open(config(), two_frame_gt(), None).unwrap();
        let blank = vec![LabelMask::new(size16()), LabelMask::new(size16())];
        // prediction before pickup
        assert!(matches!(
            s.submit_prediction_with_elapsed(&blank, 0.1),
            Err(SessionError::Phase(_))
        ));
        s.deliver_scribbles().unwrap();
        // double pickup
        assert!(matches!(
            s.deliver_scribbles(),
            Err(SessionError::Phase(_))
        ));
    }

    #[test]
    fn bad_predictions_leave_state_unchanged() {
        let mut s = SessionState::open(config(), two_frame_gt(), None).unwrap();
        s.deliver_scribbles().unwrap();
        let blank16 = LabelMask::new(size16());

        // wrong frame count
        assert!(matches!(
            s.submit_prediction_with_elapsed(std::slice::from_ref(&blank16), 0.1),
            Err(SessionError::FrameCount { want: 2, got: 1 })
        ));
        // wrong size
        let small = LabelMask::new(RasterSize::new(8, 8).unwrap());
        assert!(s
            .submit_prediction_with_elapsed(&[small.clone(), small], 0.1)
            .is_err());
        // undeclared label
        let mut alien = LabelMask::new(size16());
        alien.set(0, 0, 9);
        assert!(matches!(
            s.submit_prediction_with_elapsed(&[alien, blank16.clone()], 0.1),
            Err(SessionError::UnknownLabel(9))
        ));
        // negative and non-finite compute
        assert!(s
            .submit_prediction_with_elapsed(&[blank16.clone(), blank16.clone()], -0.1)
            .is_err());
        assert!(s
            .submit_prediction_with_elapsed(&[blank16.clone(), blank16.clone()], f64::NAN)
            .is_err());

        // session is still live and accepts a valid turn as turn 1
        assert_eq!(s.phase(), Phase::AwaitingPrediction);
        assert!(s.interactions().is_empty());
        assert_eq!(s.cumulative_s(), 0.0);
        let outcome = s
            .submit_prediction_with_elapsed(&[blank16.clone(), blank16], 0.1)
            .unwrap();
        assert!(matches!(outcome, TurnOutcome::Continue));
        assert_eq!(s.interactions()[0].index, 1);
    }

    #[test]
    fn pool_scribbles_use_recorded_times_when_complete() {
        let gt = two_frame_gt();
        let pool = ScribbleSet {
            sequence: "seq".into(),
            scribbles: vec![
                Scribble {
                    frame: 0,
                    object_label: 1,
                    path: vec![(0.2, 0.4), (0.4, 0.4)],
                    kind: ScribbleKind::Human,
                    start_time_s: Some(0.0),
                    end_time_s: Some(2.0),
                },
                Scribble {
                    frame: 1,
                    object_label: 1,
                    path: vec![(0.4, 0.4), (0.6, 0.4)],
                    kind: ScribbleKind::Human,
                    start_time_s: Some(2.5),
                    end_time_s: Some(4.0),
                },
            ],
        };
        let mut s = SessionState::open(config(), gt.clone(), Some(pool)).unwrap();
        let set = s.deliver_scribbles().unwrap();
        assert_eq!(set.scribbles.len(), 2);
        let blank = vec![LabelMask::new(size16()), LabelMask::new(size16())];
        s.submit_prediction_with_elapsed(&blank, 0.0).unwrap();
        assert_eq!(s.interactions()[0].annotation_s, 3.5);
        // both pool frames are excluded from worst-frame selection, but the
        // fallback still returns a frame when every frame is excluded
        assert_eq!(s.initial_frames.len(), 2);
    }

    #[test]
    fn pool_without_times_is_priced_by_the_cost_model() {
        let pool = ScribbleSet {
            sequence: "seq".into(),
            scribbles: vec![Scribble {
                frame: 0,
                object_label: 1,
                path: vec![(0.2, 0.4), (0.4, 0.4), (0.6, 0.4)],
                kind: ScribbleKind::Human,
                start_time_s: None,
                end_time_s: None,
            }],
        };
        let mut s = SessionState::open(config(), two_frame_gt(), Some(pool)).unwrap();
        s.deliver_scribbles().unwrap();
        let blank = vec![LabelMask::new(size16()), LabelMask::new(size16())];
        s.submit_prediction_with_elapsed(&blank, 0.0).unwrap();
        // default model: 1.5 + 0.04 * 3
        assert!((s.interactions()[0].annotation_s - 1.62).abs() < 1e-12);
    }

    #[test]
    fn pool_frame_out_of_range_is_rejected_at_open() {
        let pool = ScribbleSet {
            sequence: "seq".into(),
            scribbles: vec![Scribble {
                frame: 7,
                object_label: 1,
                path: vec![(0.2, 0.4)],
                kind: ScribbleKind::Human,
                start_time_s: None,
                end_time_s: None,
            }],
        };
        assert!(matches!(
            SessionState::open(config(), two_frame_gt(), Some(pool)),
            Err(SessionError::PoolFrame { frame: 7, frames: 2 })
        ));
    }

    #[test]
    fn bootstrap_picks_the_largest_total_area_frame() {
        let mut frame0 = LabelMask::new(size16());
        for y in 2..6 {
            for x in 2..6 {
                frame0.set(x, y, 1);
            }
        }
        // frame 1 repeats object 1 and adds object 2: larger total area
        let mut frame1 = frame0.clone();
        for y in 9..13 {
            for x in 9..13 {
                frame1.set(x, y, 2);
            }
        }
        let gt = Arc::new(vec![frame0, frame1]);
        let cfg = SessionConfig::new("s", "seq", vec![1, 2]).unwrap();
        let mut s = SessionState::open(cfg, gt, None).unwrap();
        let set = s.deliver_scribbles().unwrap();
        assert_eq!(set.frames().into_iter().collect::<Vec<_>>(), vec![1]);
        assert_eq!(set.scribbles.len(), 2);
    }

    #[test]
    fn bootstrap_area_rule_can_skip_an_object() {
        // a huge single object beats a frame where both objects are small
        let mut frame0 = LabelMask::new(size16());
        for y in 1..13 {
            for x in 1..13 {
                frame0.set(x, y, 1);
            }
        }
        let mut frame1 = LabelMask::new(size16());
        for y in 2..6 {
            for x in 2..6 {
                frame1.set(x, y, 1);
                frame1.set(x + 8, y + 8, 2);
            }
        }
        let gt = Arc::new(vec![frame0, frame1]);
        let cfg = SessionConfig::new("s", "seq", vec![1, 2]).unwrap();
        let mut s = SessionState::open(cfg, gt, None).unwrap();
        let set = s.deliver_scribbles().unwrap();
        assert_eq!(set.frames().into_iter().collect::<Vec<_>>(), vec![0]);
        // only object 1 exists on the chosen frame
        assert!(set.scribbles.iter().all(|x| x.object_label == 1));
    }

    #[test]
    fn bootstrap_area_ties_take_the_lowest_frame() {
        let mut frame = LabelMask::new(size16());
        for y in 4..10 {
            for x in 4..10 {
                frame.set(x, y, 1);
            }
        }
        let gt = Arc::new(vec![frame.clone(), frame]);
        let mut s = SessionState::open(config(), gt, None).unwrap();
        let set = s.deliver_scribbles().unwrap();
        assert_eq!(set.frames().into_iter().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn zero_max_interactions_is_rejected() {
        let mut cfg = config();
        cfg.max_interactions = 0;
        assert!(matches!(
            SessionState::open(cfg, two_frame_gt(), None),
            Err(SessionError::BadConfig(_))
        ));
    }

    #[test]
    fn quality_curve_tracks_history() {
        let gt = two_frame_gt();
        let mut s = SessionState::open(config(), gt.clone(), None).unwrap();
        s.deliver_scribbles().unwrap();
        let blank = vec![LabelMask::new(size16()), LabelMask::new(size16())];
        s.submit_prediction_with_elapsed(&blank, 0.5).unwrap();
        s.deliver_scribbles().unwrap();
        s.submit_prediction_with_elapsed(&gt, 0.5).unwrap();
        let curve = s.quality_curve();
        assert_eq!(curve.points.len(), 2);
        assert!(curve.points[0].time_s < curve.points[1].time_s);
        assert_eq!(curve.points[1].value, 1.0);
        assert_eq!(curve.per_object[&1].len(), 2);
    }
}
