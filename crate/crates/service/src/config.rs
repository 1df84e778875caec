//! Key=value service configuration with environment overrides. Every knob
//! that shapes scoring lives here so deployments can pin it.

use scribbleval_core::metrics::BoundaryTolerance;
use scribbleval_core::raster::components::Connectivity;
use scribbleval_core::robot::{AnnotationCostModel, RobotParams};
use scribbleval_core::session::curve::TrackParams;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const ENV_PREFIX: &str = "SCRIBBLEVAL_";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config line {line}: expected key=value, got {text:?}")]
    BadLine { line: usize, text: String },
    #[error("config key {key}: {message}")]
    BadValue { key: String, message: String },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub dataset_root: PathBuf,
    pub listen_addr: String,
    /// Session logs, reports, and ownership records live under here.
    pub data_dir: PathBuf,
    pub max_interactions: usize,
    pub wall_budget_s: Option<f64>,
    pub tolerance: BoundaryTolerance,
    pub robot: RobotParams,
    pub cost_model: AnnotationCostModel,
    pub track: TrackParams,
    /// Accepted bearer tokens. None accepts any caller, including
    /// anonymous ones.
    pub tokens: Option<Vec<String>>,
    /// Open sessions allowed per token; 0 means unlimited.
    pub max_open_sessions: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            dataset_root: PathBuf::from("dataset"),
            listen_addr: "127.0.0.1:7007".into(),
            data_dir: PathBuf::from("scribbleval-data"),
            max_interactions: 8,
            wall_budget_s: None,
            tolerance: BoundaryTolerance::default(),
            robot: RobotParams::default(),
            cost_model: AnnotationCostModel::default(),
            track: TrackParams::default(),
            tokens: None,
            max_open_sessions: 64,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| ConfigError::BadValue {
        key: key.to_owned(),
        message: format!("{e}"),
    })
}

impl ServiceConfig {
    /// Parse `key=value` lines. Blank lines and `#` comments are skipped;
    /// whitespace around keys and values is trimmed.
    pub fn from_text(text: &str) -> Result<ServiceConfig, ConfigError> {
        let mut cfg = ServiceConfig::default();
        let mut pairs = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::BadLine {
                line: i + 1,
                text: raw.to_owned(),
            })?;
            pairs.insert(key.trim().to_owned(), value.trim().to_owned());
        }
        for (key, value) in &pairs {
            cfg.apply(key, value)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<ServiceConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        ServiceConfig::from_text(&text)
    }

    /// Every key `apply` accepts, in documentation order.
    pub const KEYS: &'static [&'static str] = &[
        "dataset_root",
        "listen_addr",
        "data_dir",
        "max_interactions",
        "wall_budget_s",
        "tolerance_fraction",
        "min_area_fraction",
        "max_components_per_kind",
        "simplify_epsilon_px",
        "connectivity",
        "base_s",
        "per_point_s",
        "budget_rate_s",
        "threshold",
        "cap_s",
        "grid_step_s",
        "tokens",
        "max_open_sessions",
    ];

    /// Overlay `SCRIBBLEVAL_<KEY>` environment variables, uppercased keys.
    /// Only known keys are probed, so unrelated variables under the prefix
    /// cannot break startup.
    pub fn apply_env(&mut self) -> Result<(), ConfigError> {
        for key in Self::KEYS {
            let name = format!("{ENV_PREFIX}{}", key.to_ascii_uppercase());
            if let Ok(value) = std::env::var(&name) {
                self.apply(key, &value)?;
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |message: String| ConfigError::BadValue {
            key: key.to_owned(),
            message,
        };
        match key {
            "dataset_root" => self.dataset_root = PathBuf::from(value),
            "listen_addr" => self.listen_addr = value.to_owned(),
            "data_dir" => self.data_dir = PathBuf::from(value),
            "max_interactions" => self.max_interactions = parse(key, value)?,
            "wall_budget_s" => {
                self.wall_budget_s = if value.is_empty() || value == "none" {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            "tolerance_fraction" => {
                let f: f64 = parse(key, value)?;
                self.tolerance =
                    BoundaryTolerance::new(f).map_err(|e| bad(e.to_string()))?;
            }
            "min_area_fraction" => self.robot.min_area_fraction = parse(key, value)?,
            "max_components_per_kind" => {
                self.robot.max_components_per_kind = parse(key, value)?
            }
            "simplify_epsilon_px" => self.robot.simplify_epsilon_px = parse(key, value)?,
            "connectivity" => {
                self.robot.connectivity = match value {
                    "four" | "4" => Connectivity::Four,
                    "eight" | "8" => Connectivity::Eight,
                    other => return Err(bad(format!("unknown connectivity {other:?}"))),
                }
            }
            "base_s" => self.cost_model.base_s = parse(key, value)?,
            "per_point_s" => self.cost_model.per_point_s = parse(key, value)?,
            "budget_rate_s" => self.track.budget_rate_s = parse(key, value)?,
            "threshold" => self.track.threshold = parse(key, value)?,
            "cap_s" => self.track.cap_s = parse(key, value)?,
            "grid_step_s" => self.track.grid_step_s = parse(key, value)?,
            "tokens" => {
                let list: Vec<String> = value
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(str::to_owned)
                    .collect();
                self.tokens = if list.is_empty() { None } else { Some(list) };
            }
            "max_open_sessions" => self.max_open_sessions = parse(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_owned())),
        }
        Ok(())
    }
}
