//! Offline evaluation driver: runs the full interactive loop in process,
//! one session per sequence, writing the same logs and reports the server
//! would. Compute time is measured around the segmenter call alone, or
//! pinned with a fixed value for reproducible reruns.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use scribbleval_client::{
    default_features, load_rgb_jpeg, BaselineConfig, LinearBaseline, OracleSegmenter,
    ScribbleStore, Segmenter, SequenceContext, StaticSegmenter,
};
use scribbleval_core::raster::LabelMask;
use scribbleval_core::robot::wire::to_wire;
use scribbleval_core::session::curve::{
    aggregate_report, session_report, AggregateReport, SessionReport, TrackParams,
};
use scribbleval_core::session::log::{LogHeader, LogWriter};
use scribbleval_core::session::{SessionConfig, SessionState, TurnOutcome};
use scribbleval_service::{Repository, SequenceMeta};

use crate::output;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmenterKind {
    /// Echoes the reference masks: closes on the first turn.
    Oracle,
    /// Dilated scribble ink only: never good, never finished.
    Static,
    /// Per-object linear classifiers on color and position features.
    Linear,
}

#[derive(Debug, Clone)]
pub struct EvaluateOptions {
    pub dataset: PathBuf,
    /// Evaluate this split; exclusive with `sequences`.
    pub split: Option<String>,
    /// Explicit sequence names; empty means the whole manifest.
    pub sequences: Vec<String>,
    pub segmenter: SegmenterKind,
    pub track: TrackParams,
    pub max_interactions: usize,
    pub seed: u64,
    /// Pin compute seconds per turn instead of measuring wall clock.
    pub fixed_compute_s: Option<f64>,
    pub out: PathBuf,
}

fn resolve_sequences(repo: &Repository, opts: &EvaluateOptions) -> Result<Vec<String>> {
    if !opts.sequences.is_empty() && opts.split.is_some() {
        bail!("give either a split or explicit sequences, not both");
    }
    if !opts.sequences.is_empty() {
        for name in &opts.sequences {
            repo.meta(name)
                .with_context(|| format!("sequence {name:?}"))?;
        }
        return Ok(opts.sequences.clone());
    }
    if let Some(split) = &opts.split {
        let names = repo.split(split).ok_or_else(|| {
            let known: Vec<&str> = repo.manifest().splits.keys().map(|s| s.as_str()).collect();
            anyhow::anyhow!("unknown split {split:?}; dataset has {known:?}")
        })?;
        return Ok(names.to_vec());
    }
    Ok(repo.manifest().sequences.keys().cloned().collect())
}

fn build_segmenter(
    repo: &Repository,
    sequence: &str,
    meta: &SequenceMeta,
    gt: &Arc<Vec<LabelMask>>,
    opts: &EvaluateOptions,
) -> Result<Box<dyn Segmenter>> {
    Ok(match opts.segmenter {
        SegmenterKind::Oracle => Box::new(OracleSegmenter::new(gt.as_ref().clone())),
        SegmenterKind::Static => Box::new(StaticSegmenter::default()),
        SegmenterKind::Linear => {
            let mut frames = Vec::with_capacity(meta.frames);
            for f in 0..meta.frames {
                let path = repo.image_path(sequence, f);
                frames.push(
                    load_rgb_jpeg(&path)
                        .with_context(|| format!("loading {}", path.display()))?,
                );
            }
            let features = default_features(&frames)?;
            Box::new(LinearBaseline::new(
                features,
                BaselineConfig::default(),
                opts.seed,
            )?)
        }
    })
}

fn run_sequence(
    repo: &Repository,
    sequence: &str,
    opts: &EvaluateOptions,
) -> Result<SessionReport> {
    let meta = repo.meta(sequence)?.clone();
    let gt = Arc::new(repo.load_ground_truth(sequence)?);
    let pool = repo.load_scribble_pool(sequence)?;
    let mut segmenter = build_segmenter(repo, sequence, &meta, &gt, opts)?;

    let mut config = SessionConfig::new(format!("local-{sequence}"), sequence, meta.objects)?;
    config.max_interactions = opts.max_interactions;
    let mut state = SessionState::open(config, Arc::clone(&gt), pool)?;

    let header = LogHeader::new(state.config(), state.frames(), state.size(), opts.track);
    let log_path = opts.out.join("sessions").join(format!("{sequence}.jsonl"));
    let mut log = LogWriter::create(&log_path, &header)?;

    let ctx = SequenceContext {
        sequence: sequence.to_owned(),
        frames: state.frames(),
        size: state.size(),
        objects: state.config().objects.clone(),
    };
    let mut store = ScribbleStore::new(&ctx);
    loop {
        let set = state.deliver_scribbles()?;
        store.absorb(&to_wire(&set, state.frames()))?;
        let started = Instant::now();
        let masks = segmenter.predict(&ctx, &store)?;
        let compute_s = opts
            .fixed_compute_s
            .unwrap_or_else(|| started.elapsed().as_secs_f64());
        let outcome = state.submit_prediction_with_elapsed(&masks, compute_s)?;
        let record = state.interactions().last().expect("turn just scored");
        log.record(record)?;
        if let TurnOutcome::Closed(reason) = outcome {
            log.close(reason, state.cumulative_s(), state.interactions().len())?;
            return Ok(session_report(
                &state.config().session_id,
                sequence,
                state.frames(),
                state.size(),
                &state.config().objects,
                reason,
                state.quality_curve(),
                &opts.track,
            )?);
        }
    }
}

/// Evaluate every resolved sequence, then write per-session reports and the
/// shared summary artifacts under `opts.out`.
pub fn cmd_evaluate(opts: &EvaluateOptions) -> Result<AggregateReport> {
    opts.track.validate()?;
    if opts.max_interactions == 0 {
        bail!("max interactions must be at least 1");
    }
    if let Some(c) = opts.fixed_compute_s {
        if !(c.is_finite() && c >= 0.0) {
            bail!("fixed compute seconds must be finite and nonnegative, got {c}");
        }
    }
    let repo = Repository::open(&opts.dataset)
        .with_context(|| format!("opening dataset {}", opts.dataset.display()))?;
    let names = resolve_sequences(&repo, opts)?;
    if names.is_empty() {
        bail!("nothing to evaluate: the sequence list is empty");
    }
    let mut reports = Vec::with_capacity(names.len());
    for name in &names {
        let report = run_sequence(&repo, name, opts)
            .with_context(|| format!("evaluating {name:?}"))?;
        println!(
            "{name}: {} after {} interactions, quality at budget {:.4}",
            output::close_reason_label(report.close_reason),
            report.interactions,
            report.summary.quality_at_budget
        );
        output::write_session_report(&opts.out, &report)?;
        reports.push(report);
    }
    let aggregate = aggregate_report(&reports, opts.track.grid_step_s)?;
    output::write_summaries(&opts.out, &reports, &aggregate, &opts.track)?;
    println!(
        "{} sessions: mean quality at budget {:.4}, total time to {:.2} quality {:.1}s ({} object(s) never reached it)",
        aggregate.sessions,
        aggregate.mean_quality_at_budget,
        opts.track.threshold,
        aggregate.total_speed_s,
        aggregate.total_unreached_objects
    );
    Ok(aggregate)
}
