//! Serialized shape of scribble sets, shared by pool files on disk and the
//! session protocol: one entry per frame, each a list of strokes with
//! unit-square points.

use super::{RobotError, Scribble, ScribbleKind, ScribbleSet};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireScribbleSet {
    pub sequence: String,
    /// Outer index is the frame number.
    pub scribbles: Vec<Vec<WireScribble>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireScribble {
    pub path: Vec<(f64, f64)>,
    pub object_id: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_time: Option<f64>,
}

/// Spread a set over `frame_count` frame slots. Strokes keep their relative
/// order within each frame.
pub fn to_wire(set: &ScribbleSet, frame_count: usize) -> WireScribbleSet {
    let mut frames: Vec<Vec<WireScribble>> = vec![Vec::new(); frame_count];
    for s in &set.scribbles {
        debug_assert!(s.frame < frame_count);
        frames[s.frame].push(WireScribble {
            path: s.path.clone(),
            object_id: s.object_label,
            start_time: s.start_time_s,
            end_time: s.end_time_s,
        });
    }
    WireScribbleSet {
        sequence: set.sequence.clone(),
        scribbles: frames,
    }
}

/// Flatten wire frames back into a set, validating point ranges and path
/// presence. The caller says what the strokes are (recorded human pool,
/// simulated, ...).
pub fn from_wire(wire: &WireScribbleSet, kind: ScribbleKind) -> Result<ScribbleSet, RobotError> {
    let mut set = ScribbleSet::empty(wire.sequence.clone());
    for (frame, strokes) in wire.scribbles.iter().enumerate() {
        for stroke in strokes {
            if stroke.path.is_empty() {
                return Err(RobotError::BadParam(format!(
                    "frame {frame}: stroke with empty path"
                )));
            }
            for &(x, y) in &stroke.path {
                if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
                    return Err(RobotError::BadParam(format!(
                        "frame {frame}: point ({x}, {y}) outside the unit square"
                    )));
                }
            }
            set.scribbles.push(Scribble {
                frame,
                object_label: stroke.object_id,
                path: stroke.path.clone(),
                kind,
                start_time_s: stroke.start_time,
                end_time_s: stroke.end_time,
            });
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_set() -> ScribbleSet {
        ScribbleSet {
            sequence: "seq".into(),
            scribbles: vec![
                Scribble {
                    frame: 2,
                    object_label: 1,
                    path: vec![(0.0, 0.0), (0.5, 0.5)],
                    kind: ScribbleKind::Human,
                    start_time_s: Some(0.0),
                    end_time_s: Some(1.5),
                },
                Scribble {
                    frame: 0,
                    object_label: 0,
                    path: vec![(0.25, 0.75)],
                    kind: ScribbleKind::Human,
                    start_time_s: None,
                    end_time_s: None,
                },
            ],
        }
    }

    #[test]
    fn wire_roundtrip_preserves_strokes() {
        let set = sample_set();
        let wire = to_wire(&set, 4);
        assert_eq!(wire.scribbles.len(), 4);
        assert_eq!(wire.scribbles[1].len(), 0);
        assert_eq!(wire.scribbles[2][0].object_id, 1);
        let back = from_wire(&wire, ScribbleKind::Human).unwrap();
        // frame order becomes ascending after the roundtrip
        assert_eq!(back.scribbles.len(), 2);
        assert_eq!(back.scribbles[0].frame, 0);
        assert_eq!(back.scribbles[1].frame, 2);
        assert_eq!(back.scribbles[1].start_time_s, Some(0.0));
        assert_eq!(back.scribbles[1].end_time_s, Some(1.5));
    }

    #[test]
    fn wire_json_shape_is_stable() {
        let wire = to_wire(&sample_set(), 3);
        let json = serde_json::to_value(&wire).unwrap();
        assert_eq!(json["sequence"], "seq");
        assert_eq!(json["scribbles"][0][0]["object_id"], 0);
        assert_eq!(json["scribbles"][0][0]["path"][0][0], 0.25);
        assert!(json["scribbles"][0][0].get("start_time").is_none());
        assert_eq!(json["scribbles"][2][0]["start_time"], 0.0);
    }

    #[test]
    fn from_wire_rejects_bad_points_and_empty_paths() {
        let mut wire = to_wire(&sample_set(), 3);
        wire.scribbles[0][0].path[0] = (1.5, 0.0);
        assert!(from_wire(&wire, ScribbleKind::Human).is_err());
        let mut empty = to_wire(&sample_set(), 3);
        empty.scribbles[2][0].path.clear();
        assert!(from_wire(&empty, ScribbleKind::Human).is_err());
    }
}
