//! Rebuild summary artifacts from session logs alone. The logs carry
//! everything the curves need, so reports can be regenerated long after the
//! sessions ran, and logs from many runs can be pooled into one summary.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use scribbleval_core::session::curve::{aggregate_report, AggregateReport, TrackParams};
use scribbleval_core::session::log::{read_session_log, rebuild_report};

use crate::output;

#[derive(Debug, Clone)]
pub struct ReportOptions {
    /// Log files, or directories scanned (non-recursively) for `*.jsonl`.
    pub logs: Vec<PathBuf>,
    pub out: PathBuf,
    /// Overrides the grid step recorded in the first log when set.
    pub grid_step_s: Option<f64>,
}

fn collect_log_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found = Vec::new();
            let entries = std::fs::read_dir(input)
                .with_context(|| format!("listing {}", input.display()))?;
            for entry in entries {
                let path = entry
                    .with_context(|| format!("listing {}", input.display()))?
                    .path();
                if path.extension().is_some_and(|e| e == "jsonl") {
                    found.push(path);
                }
            }
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    Ok(files)
}

/// Rebuild per-session reports from the logs and write `curve.csv`,
/// `tracks.csv`, and `summary.json` under `opts.out`.
pub fn cmd_report(opts: &ReportOptions) -> Result<AggregateReport> {
    let files = collect_log_files(&opts.logs)?;
    if files.is_empty() {
        bail!("no session logs found under the given paths");
    }
    let mut reports = Vec::with_capacity(files.len());
    let mut track: Option<TrackParams> = None;
    for path in &files {
        let log = read_session_log(path)
            .with_context(|| format!("reading session log {}", path.display()))?;
        let report =
            rebuild_report(&log).with_context(|| format!("rebuilding {}", path.display()))?;
        track.get_or_insert(log.header.track);
        reports.push(report);
    }
    let mut track = track.expect("at least one log parsed");
    if let Some(step) = opts.grid_step_s {
        track.grid_step_s = step;
    }
    let aggregate = aggregate_report(&reports, track.grid_step_s)?;
    output::write_summaries(&opts.out, &reports, &aggregate, &track)?;
    println!(
        "{} sessions from {} logs: mean quality at budget {:.4}, total speed {:.1}s",
        aggregate.sessions,
        files.len(),
        aggregate.mean_quality_at_budget,
        aggregate.total_speed_s
    );
    Ok(aggregate)
}

/// Directories are scanned in the order given; explicit files keep their
/// position. Used by tests to pin the scan order.
pub fn log_files_in(path: &Path) -> Result<Vec<PathBuf>> {
    collect_log_files(std::slice::from_ref(&path.to_path_buf()))
}
