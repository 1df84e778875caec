//! Evaluation service: serves scribbles, scores predictions, and persists
//! session reports. Ground-truth masks never leave this process; the only
//! annotation-derived signal on the wire is scribble polylines.

pub mod api;
pub mod config;
pub mod dataset;
pub mod state;

pub use api::{router, serve, serve_listener};
pub use config::ServiceConfig;
pub use dataset::{load_manifest, DatasetManifest, Repository, SequenceMeta};
pub use state::{ErrorCode, EvalService, ServiceError};
