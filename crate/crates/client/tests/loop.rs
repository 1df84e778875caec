//! The interactive loop against an in-process session: no network, real
//! robot, real scoring.

use scribbleval_client::{
    run_interactive_loop, BaselineConfig, ClientError, ClientTurn, LinearBaseline,
    OpenTarget, OpenedSession, OracleSegmenter, RgbFrame, SequenceContext, StaticSegmenter,
    Transport, default_features,
};
use scribbleval_core::raster::{LabelMask, RasterSize, StructuringElement};
use scribbleval_core::robot::wire::to_wire;
use scribbleval_core::session::curve::{session_report, TrackParams};
use scribbleval_core::session::{SessionConfig, SessionState, TurnOutcome};
use std::collections::BTreeSet;
use std::sync::Arc;

struct LocalTransport {
    gt: Arc<Vec<LabelMask>>,
    max_interactions: usize,
    state: Option<SessionState>,
}

impl LocalTransport {
    fn new(gt: Vec<LabelMask>, max_interactions: usize) -> LocalTransport {
        LocalTransport {
            gt: Arc::new(gt),
            max_interactions,
            state: None,
        }
    }
}

fn session_err(e: scribbleval_core::session::SessionError) -> ClientError {
    ClientError::Protocol {
        code: "session".into(),
        message: e.to_string(),
    }
}

impl Transport for LocalTransport {
    fn open(&mut self, target: &OpenTarget) -> Result<OpenedSession, ClientError> {
        let OpenTarget::Sequence(name) = target else {
            return Err(ClientError::BadParam("local transport needs a sequence".into()));
        };
        let objects: Vec<u8> = self
            .gt
            .iter()
            .flat_map(|m| m.object_ids())
            .collect::<BTreeSet<u8>>()
            .into_iter()
            .collect();
        let mut config =
            SessionConfig::new("local", name.clone(), objects.clone()).map_err(session_err)?;
        config.max_interactions = self.max_interactions;
        let mut state =
            SessionState::open(config, Arc::clone(&self.gt), None).map_err(session_err)?;
        let set = state.deliver_scribbles().map_err(session_err)?;
        let frames = state.frames();
        let size = state.size();
        self.state = Some(state);
        Ok(OpenedSession {
            session_id: "local".into(),
            context: SequenceContext {
                sequence: name.clone(),
                frames,
                size,
                objects,
            },
            scribbles: to_wire(&set, frames),
        })
    }

    fn submit(
        &mut self,
        _session_id: &str,
        masks: &[LabelMask],
    ) -> Result<ClientTurn, ClientError> {
        let state = self
            .state
            .as_mut()
            .ok_or_else(|| ClientError::BadParam("no open session".into()))?;
        match state.submit_prediction(masks).map_err(session_err)? {
            TurnOutcome::Continue => {
                let set = state.deliver_scribbles().map_err(session_err)?;
                Ok(ClientTurn::Scribbles(to_wire(&set, state.frames())))
            }
            TurnOutcome::Closed(reason) => {
                let report = session_report(
                    "local",
                    &state.config().sequence,
                    state.frames(),
                    state.size(),
                    &state.config().objects,
                    reason,
                    state.quality_curve(),
                    &TrackParams::default(),
                )
                .map_err(session_err)?;
                Ok(ClientTurn::Report(Box::new(report)))
            }
        }
    }
}

fn size(w: u32, h: u32) -> RasterSize {
    RasterSize::new(w, h).unwrap()
}

/// Two solid squares drifting right, analytically placed per frame.
fn two_square_gt(frames: usize, side: u32) -> Vec<LabelMask> {
    let sz = size(side, side);
    (0..frames)
        .map(|f| {
            let mut m = LabelMask::new(sz);
            let d = f as u32;
            for y in 0..side {
                for x in 0..side {
                    if (4 + d..12 + d).contains(&x) && (4..12).contains(&y) {
                        m.set(x, y, 1);
                    } else if (4 + d..12 + d).contains(&x) && (18..26).contains(&y) {
                        m.set(x, y, 2);
                    }
                }
            }
            m
        })
        .collect()
}

#[test]
fn oracle_closes_on_the_first_turn_with_perfect_quality() {
    let gt = two_square_gt(4, 32);
    let mut transport = LocalTransport::new(gt.clone(), 8);
    let mut seg = OracleSegmenter::new(gt);
    let outcome = run_interactive_loop(
        &mut transport,
        &OpenTarget::Sequence("drift".into()),
        &mut seg,
        16,
    )
    .unwrap();
    assert_eq!(outcome.turns, 1);
    assert_eq!(outcome.report.interactions, 1);
    assert_eq!(outcome.report.curve.points[0].value, 1.0);
    assert_eq!(outcome.report.summary.quality_at_budget, 1.0);
    assert!(outcome.report.summary.speed_unreached.is_empty());
}

#[test]
fn static_segmenter_scores_above_zero_and_hits_the_interaction_cap() {
    let gt = two_square_gt(4, 32);
    let mut transport = LocalTransport::new(gt, 3);
    let mut seg = StaticSegmenter::default();
    let outcome = run_interactive_loop(
        &mut transport,
        &OpenTarget::Sequence("drift".into()),
        &mut seg,
        16,
    )
    .unwrap();
    assert_eq!(outcome.turns, 3);
    let points = &outcome.report.curve.points;
    assert!(points[0].value > 0.0, "dilated scribbles overlap their objects");
    for pair in points.windows(2) {
        assert!(pair[1].time_s > pair[0].time_s, "timestamps must increase");
    }
}

#[test]
fn linear_baseline_reaches_high_quality_on_color_coded_squares() {
    let frames = 4usize;
    let side = 32u32;
    let gt = two_square_gt(frames, side);
    let rgb: Vec<RgbFrame> = gt
        .iter()
        .map(|mask| {
            let mut pixels = Vec::new();
            for y in 0..side {
                for x in 0..side {
                    pixels.push(match mask.get(x, y) {
                        1 => [230, 20, 20],
                        2 => [20, 20, 230],
                        _ => [12, 12, 12],
                    });
                }
            }
            RgbFrame::new(size(side, side), pixels).unwrap()
        })
        .collect();
    let features = default_features(&rgb).unwrap();
    // the care band must blanket an 8x8 object from a short central scribble,
    // or the object's own unscribbled pixels train as background
    let cfg = BaselineConfig {
        fg_se: StructuringElement::disk(1),
        care_se: StructuringElement::disk(8),
        ..BaselineConfig::default()
    };
    let mut seg = LinearBaseline::new(features, cfg, 7).unwrap();
    let mut transport = LocalTransport::new(gt, 8);
    let outcome = run_interactive_loop(
        &mut transport,
        &OpenTarget::Sequence("drift".into()),
        &mut seg,
        16,
    )
    .unwrap();
    let final_quality = outcome.report.curve.points.last().unwrap().value;
    assert!(
        final_quality >= 0.6,
        "final overall quality {final_quality} after {} turns",
        outcome.turns
    );
    // the feature map is the one object handed in at construction
    assert_eq!(seg.features().frames(), frames);
}

#[test]
fn the_client_side_turn_cap_aborts_a_never_closing_session() {
    let gt = two_square_gt(4, 32);
    let mut transport = LocalTransport::new(gt, 8);
    let mut seg = StaticSegmenter::default();
    let err = run_interactive_loop(
        &mut transport,
        &OpenTarget::Sequence("drift".into()),
        &mut seg,
        2,
    )
    .unwrap_err();
    assert!(matches!(err, ClientError::Aborted(_)));
}
