use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use scribbleval::evaluate::{cmd_evaluate, EvaluateOptions, SegmenterKind};
use scribbleval::report::{cmd_report, ReportOptions};
use scribbleval::serve::{cmd_serve, parse_override, ServeOptions};
use scribbleval::synth::{cmd_synth, Motion, SynthSpec};
use scribbleval_core::session::curve::TrackParams;

#[derive(Parser)]
#[command(
    name = "scribbleval",
    version,
    about = "Interactive scribble-driven video segmentation evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the evaluation server until interrupted
    Serve(ServeArgs),
    /// Drive interactive sessions in process; write logs, reports, summaries
    Evaluate(EvaluateArgs),
    /// Generate a synthetic dataset of moving squares
    Synth(SynthArgs),
    /// Rebuild summary artifacts from session logs
    Report(ReportArgs),
}

#[derive(Args)]
struct ServeArgs {
    /// Config file with `key = value` lines
    #[arg(long, env = "SCRIBBLEVAL_CONFIG")]
    config: Option<PathBuf>,
    /// Listen address, e.g. 127.0.0.1:7007
    #[arg(long)]
    listen: Option<String>,
    /// Dataset root directory
    #[arg(long)]
    dataset: Option<String>,
    /// Directory for session logs and reports
    #[arg(long)]
    data_dir: Option<String>,
    /// Extra config override, `key=value`; repeatable, applied last
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SegmenterArg {
    /// Echo the reference masks (closes on the first turn)
    Oracle,
    /// Dilated scribble ink only (never closes on its own)
    Static,
    /// Per-object linear classifiers on color and position features
    Linear,
}

impl From<SegmenterArg> for SegmenterKind {
    fn from(arg: SegmenterArg) -> SegmenterKind {
        match arg {
            SegmenterArg::Oracle => SegmenterKind::Oracle,
            SegmenterArg::Static => SegmenterKind::Static,
            SegmenterArg::Linear => SegmenterKind::Linear,
        }
    }
}

#[derive(Args)]
struct EvaluateArgs {
    /// Dataset root directory
    #[arg(long, env = "SCRIBBLEVAL_DATASET_ROOT")]
    dataset: PathBuf,
    /// Evaluate the sequences of this split
    #[arg(long, env = "SCRIBBLEVAL_SPLIT", conflicts_with = "sequence")]
    split: Option<String>,
    /// Evaluate this sequence; repeatable. Default: every sequence
    #[arg(long = "sequence")]
    sequence: Vec<String>,
    #[arg(long, value_enum, env = "SCRIBBLEVAL_SEGMENTER")]
    segmenter: SegmenterArg,
    /// Annotation budget granted per frame per object, seconds
    #[arg(long, default_value_t = 5.0, env = "SCRIBBLEVAL_BUDGET_RATE_S")]
    budget_rate_s: f64,
    /// Quality bar for the timing track
    #[arg(long, default_value_t = 0.60, env = "SCRIBBLEVAL_THRESHOLD")]
    threshold: f64,
    /// Seconds charged to an object that never reaches the bar
    #[arg(long, default_value_t = 300.0, env = "SCRIBBLEVAL_CAP_S")]
    cap_s: f64,
    /// Sampling step of the aggregate curve, seconds
    #[arg(long, default_value_t = 1.0, env = "SCRIBBLEVAL_GRID_STEP_S")]
    grid_step_s: f64,
    /// Scribble rounds before a session is force-closed
    #[arg(long, default_value_t = 8, env = "SCRIBBLEVAL_MAX_INTERACTIONS")]
    max_interactions: usize,
    /// Classifier seed (the linear segmenter derives per-object seeds)
    #[arg(long, default_value_t = 0, env = "SCRIBBLEVAL_SEED")]
    seed: u64,
    /// Pin compute seconds per turn for byte-reproducible reruns
    #[arg(long, env = "SCRIBBLEVAL_FIXED_COMPUTE_S")]
    fixed_compute_s: Option<f64>,
    /// Output directory
    #[arg(long, env = "SCRIBBLEVAL_OUT")]
    out: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MotionArg {
    /// Constant velocity, clamped at the frame edge
    Drift,
    /// Constant speed, reflected at the frame edge
    Bounce,
}

#[derive(Args)]
struct SynthArgs {
    /// Dataset root directory to create
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2)]
    sequences: usize,
    #[arg(long, default_value_t = 10)]
    frames: usize,
    #[arg(long, default_value_t = 64)]
    width: u32,
    #[arg(long, default_value_t = 64)]
    height: u32,
    /// Objects per sequence (1 to 3), one per horizontal band
    #[arg(long, default_value_t = 2)]
    objects: u8,
    #[arg(long, value_enum, default_value_t = MotionArg::Drift)]
    motion: MotionArg,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Name of the emitted split file
    #[arg(long, default_value = "all")]
    split_name: String,
}

#[derive(Args)]
struct ReportArgs {
    /// Session log files, or directories scanned for *.jsonl
    #[arg(long = "logs", required = true, num_args = 1..)]
    logs: Vec<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Override the aggregate grid step recorded in the logs, seconds
    #[arg(long)]
    grid_step_s: Option<f64>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Serve(args) => {
            let overrides = args
                .set
                .iter()
                .map(|raw| parse_override(raw))
                .collect::<Result<Vec<_>>>()?;
            cmd_serve(&ServeOptions {
                config: args.config,
                listen: args.listen,
                dataset: args.dataset,
                data_dir: args.data_dir,
                overrides,
            })
        }
        Command::Evaluate(args) => {
            cmd_evaluate(&EvaluateOptions {
                dataset: args.dataset,
                split: args.split,
                sequences: args.sequence,
                segmenter: args.segmenter.into(),
                track: TrackParams {
                    budget_rate_s: args.budget_rate_s,
                    threshold: args.threshold,
                    cap_s: args.cap_s,
                    grid_step_s: args.grid_step_s,
                },
                max_interactions: args.max_interactions,
                seed: args.seed,
                fixed_compute_s: args.fixed_compute_s,
                out: args.out,
            })?;
            Ok(())
        }
        Command::Synth(args) => {
            let spec = SynthSpec {
                sequences: args.sequences,
                frames: args.frames,
                width: args.width,
                height: args.height,
                objects: args.objects,
                motion: match args.motion {
                    MotionArg::Drift => Motion::Drift,
                    MotionArg::Bounce => Motion::Bounce,
                },
                seed: args.seed,
                split_name: args.split_name,
            };
            let names = cmd_synth(&spec, &args.out)?;
            println!(
                "wrote {} sequences x {} frames under {}",
                names.len(),
                spec.frames,
                args.out.display()
            );
            Ok(())
        }
        Command::Report(args) => {
            cmd_report(&ReportOptions {
                logs: args.logs,
                out: args.out,
                grid_step_s: args.grid_step_s,
            })?;
            Ok(())
        }
    }
}
