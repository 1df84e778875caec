//! Shared foundation for the interactive segmentation evaluation stack:
//! raster containers and morphology, overlap and boundary metrics, the
//! corrective-scribble robot, and session state with time accounting.

pub mod metrics;
pub mod raster;
pub mod robot;
pub mod session;
