//! Simulated annotator: turns the disagreement between a prediction and the
//! reference into corrective scribbles and prices the annotation effort.

mod generate;
mod longest;
mod simplify;
pub mod wire;

pub use generate::{
    bootstrap_initial_scribbles, error_regions, estimate_annotation_time, filter_spurious,
    generate_scribbles,
};
pub use longest::skeleton_longest_path;
pub use simplify::simplify_path;

use crate::metrics::MetricsError;
use crate::raster::components::Connectivity;
use crate::raster::{RasterError, RasterSize};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, thiserror::Error)]
pub enum RobotError {
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("mask sizes differ: {pred} vs {gt}")]
    SizeMismatch { pred: RasterSize, gt: RasterSize },
    #[error("region is empty")]
    EmptyRegion,
    #[error("scribble parameter out of range: {0}")]
    BadParam(String),
}

impl From<MetricsError> for RobotError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::SizeMismatch { pred, gt } => RobotError::SizeMismatch { pred, gt },
            other => RobotError::BadParam(other.to_string()),
        }
    }
}

/// Shape of the simulated scribbles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotParams {
    /// Error components below this fraction of the frame area are noise and
    /// draw no scribble.
    pub min_area_fraction: f64,
    /// At most this many components per error kind (missed / spurious) per
    /// object get a scribble, largest first.
    pub max_components_per_kind: usize,
    /// Simplification threshold in pixels; values <= 0 keep every point.
    pub simplify_epsilon_px: f64,
    pub connectivity: Connectivity,
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            min_area_fraction: 0.005,
            max_components_per_kind: 1,
            simplify_epsilon_px: 2.0,
            connectivity: Connectivity::Eight,
        }
    }
}

/// Fixed cost plus a per-point cost, per scribble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnotationCostModel {
    pub base_s: f64,
    pub per_point_s: f64,
}

impl Default for AnnotationCostModel {
    fn default() -> Self {
        Self {
            base_s: 1.5,
            per_point_s: 0.04,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScribbleKind {
    /// Drawn by a person; may carry recorded timing.
    Human,
    /// Emitted by the robot mid-session.
    Simulated,
    /// Synthesized opening annotation when no human pool exists.
    Bootstrap,
}

/// One stroke. Points live in the unit square; `object_label` is the id the
/// stroke asserts, with 0 marking background corrections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scribble {
    pub frame: usize,
    pub object_label: u8,
    pub path: Vec<(f64, f64)>,
    pub kind: ScribbleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_time_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_time_s: Option<f64>,
}

/// Strokes delivered together in one interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScribbleSet {
    pub sequence: String,
    pub scribbles: Vec<Scribble>,
}

impl ScribbleSet {
    pub fn empty(sequence: impl Into<String>) -> Self {
        Self {
            sequence: sequence.into(),
            scribbles: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.scribbles.is_empty()
    }

    /// Distinct frames touched, ascending.
    pub fn frames(&self) -> BTreeSet<usize> {
        self.scribbles.iter().map(|s| s.frame).collect()
    }

    pub fn total_points(&self) -> usize {
        self.scribbles.iter().map(|s| s.path.len()).sum()
    }

    /// Sum of recorded drawing times; present only when every stroke carries
    /// both timestamps.
    pub fn recorded_time_s(&self) -> Option<f64> {
        if self.scribbles.is_empty() {
            return None;
        }
        let mut total = 0.0;
        for s in &self.scribbles {
            match (s.start_time_s, s.end_time_s) {
                (Some(a), Some(b)) if b >= a => total += b - a,
                _ => return None,
            }
        }
        Some(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stroke(frame: usize, times: Option<(f64, f64)>) -> Scribble {
        Scribble {
            frame,
            object_label: 1,
            path: vec![(0.1, 0.1), (0.2, 0.2)],
            kind: ScribbleKind::Human,
            start_time_s: times.map(|t| t.0),
            end_time_s: times.map(|t| t.1),
        }
    }

    #[test]
    fn frames_collects_distinct_sorted() {
        let set = ScribbleSet {
            sequence: "s".into(),
            scribbles: vec![stroke(3, None), stroke(0, None), stroke(3, None)],
        };
        assert_eq!(set.frames().into_iter().collect::<Vec<_>>(), vec![0, 3]);
        assert_eq!(set.total_points(), 6);
    }

    #[test]
    fn recorded_time_requires_every_stroke_timed() {
        let timed = ScribbleSet {
            sequence: "s".into(),
            scribbles: vec![stroke(0, Some((1.0, 3.5))), stroke(1, Some((4.0, 5.0)))],
        };
        assert_eq!(timed.recorded_time_s(), Some(3.5));
        let partial = ScribbleSet {
            sequence: "s".into(),
            scribbles: vec![stroke(0, Some((1.0, 3.5))), stroke(1, None)],
        };
        assert_eq!(partial.recorded_time_s(), None);
        assert_eq!(ScribbleSet::empty("s").recorded_time_s(), None);
    }

    #[test]
    fn scribble_json_omits_absent_times() {
        let s = serde_json::to_string(&stroke(0, None)).unwrap();
        assert!(!s.contains("start_time_s"));
        let t = serde_json::to_string(&stroke(0, Some((0.0, 1.0)))).unwrap();
        assert!(t.contains("start_time_s"));
    }
}
