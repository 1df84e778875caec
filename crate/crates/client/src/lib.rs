//! Client side of the evaluation loop: turns scribbles into training labels,
//! fits one linear classifier per object on pluggable per-pixel features,
//! and drives sessions against the service or an in-process stand-in.

pub mod api;
pub mod features;
pub mod labels;
pub mod segment;
pub mod svm;

pub use api::{run_interactive_loop, ApiClient, ClientTurn, LoopOutcome, OpenTarget, OpenedSession, Transport};
pub use features::{default_features, load_rgb_jpeg, FeatureMap, RgbFrame};
pub use labels::{scribble_to_labels, BaselineConfig, ScribbleLabels};
pub use segment::{
    predict_masks, LinearBaseline, OracleSegmenter, ScribbleStore, Segmenter, SequenceContext,
    StaticSegmenter,
};
pub use svm::{fit_linear_svm, LinearScorer, TrainingSet};

use scribbleval_core::raster::RasterError;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("care support must contain the foreground support")]
    SupportOrder,
    #[error("mask sizes disagree")]
    SizeMismatch,
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("object {0}: training labels are single-class")]
    SingleClass(u8),
    #[error("feature file: {0}")]
    BadFeatureFile(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("transport: {0}")]
    Transport(String),
    #[error("server rejected the request ({code}): {message}")]
    Protocol { code: String, message: String },
    #[error("unexpected response: {0}")]
    BadResponse(String),
    #[error("aborted: {0}")]
    Aborted(String),
}
