//! Summary artifacts shared by `evaluate` and `report`. The column layouts
//! here are frozen: downstream tooling parses them by name.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use scribbleval_core::session::curve::{AggregateReport, SessionReport, TrackParams};
use scribbleval_core::session::CloseReason;

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn close_reason_label(reason: CloseReason) -> &'static str {
    match reason {
        CloseReason::ErrorFree => "error_free",
        CloseReason::MaxInteractions => "max_interactions",
        CloseReason::WallBudget => "wall_budget",
    }
}

/// `reports/<sequence>.report.json`, pretty-printed with a trailing newline.
pub fn write_session_report(out_dir: &Path, report: &SessionReport) -> Result<()> {
    let path = out_dir
        .join("reports")
        .join(format!("{}.report.json", report.sequence));
    let mut bytes = serde_json::to_vec_pretty(report)?;
    bytes.push(b'\n');
    write_atomic(&path, &bytes)
}

/// `curve.csv`: the aggregate quality curve on the shared time grid.
fn curve_csv(aggregate: &AggregateReport) -> String {
    let mut out = String::from("time_s,mean_overall\n");
    for p in &aggregate.grid {
        let _ = writeln!(out, "{},{}", p.time_s, p.value);
    }
    out
}

/// `tracks.csv`: one row per session. List-valued columns join on '|'.
fn tracks_csv(reports: &[SessionReport]) -> String {
    let mut out = String::from(
        "sequence,session_id,frames,objects,interactions,close_reason,\
         budget_s,quality_at_budget,speed_total_s,unreached_objects\n",
    );
    for r in reports {
        let objects = r
            .objects
            .iter()
            .map(|o| o.to_string())
            .collect::<Vec<_>>()
            .join("|");
        let unreached = r
            .summary
            .speed_unreached
            .iter()
            .map(|o| o.to_string())
            .collect::<Vec<_>>()
            .join("|");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.sequence,
            r.session_id,
            r.frames,
            objects,
            r.interactions,
            close_reason_label(r.close_reason),
            r.summary.budget_s,
            r.summary.quality_at_budget,
            r.summary.speed_total_s,
            unreached
        );
    }
    out
}

/// Write `curve.csv`, `tracks.csv`, and `summary.json` under `out_dir`.
pub fn write_summaries(
    out_dir: &Path,
    reports: &[SessionReport],
    aggregate: &AggregateReport,
    track: &TrackParams,
) -> Result<()> {
    write_atomic(&out_dir.join("curve.csv"), curve_csv(aggregate).as_bytes())?;
    write_atomic(&out_dir.join("tracks.csv"), tracks_csv(reports).as_bytes())?;
    let summary = serde_json::json!({
        "track": track,
        "aggregate": aggregate,
    });
    let mut bytes = serde_json::to_vec_pretty(&summary)?;
    bytes.push(b'\n');
    write_atomic(&out_dir.join("summary.json"), &bytes)
}
