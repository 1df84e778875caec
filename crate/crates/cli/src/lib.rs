//! Command implementations behind the `scribbleval` binary: an evaluation
//! server, an offline session driver, a synthetic dataset generator, and a
//! report rebuilder for session logs.

pub mod evaluate;
pub mod output;
pub mod report;
pub mod serve;
pub mod synth;
