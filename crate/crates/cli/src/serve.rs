//! Server command: layer config sources (defaults, config file, environment,
//! flags), sanity-check the dataset root, then run the HTTP service until
//! interrupted.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use scribbleval_service::ServiceConfig;

#[derive(Debug, Clone, Default)]
pub struct ServeOptions {
    /// `key = value` config file; see `ServiceConfig::KEYS` for the keys.
    pub config: Option<PathBuf>,
    pub listen: Option<String>,
    pub dataset: Option<String>,
    pub data_dir: Option<String>,
    /// Extra `key=value` overrides, applied last.
    pub overrides: Vec<(String, String)>,
}

/// Resolve the effective config. Precedence, weakest first: defaults,
/// config file, `SCRIBBLEVAL_*` environment, flags.
pub fn resolve_config(opts: &ServeOptions) -> Result<ServiceConfig> {
    let mut config = match &opts.config {
        Some(path) => ServiceConfig::from_file(path)?,
        None => ServiceConfig::default(),
    };
    config.apply_env()?;
    if let Some(v) = &opts.listen {
        config.apply("listen_addr", v)?;
    }
    if let Some(v) = &opts.dataset {
        config.apply("dataset_root", v)?;
    }
    if let Some(v) = &opts.data_dir {
        config.apply("data_dir", v)?;
    }
    for (key, value) in &opts.overrides {
        config.apply(key, value)?;
    }
    if !config.dataset_root.is_dir() {
        bail!(
            "dataset root {} is not a directory",
            config.dataset_root.display()
        );
    }
    Ok(config)
}

pub fn cmd_serve(opts: &ServeOptions) -> Result<()> {
    let config = resolve_config(opts)?;
    let addr = config.listen_addr.clone();
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .context("starting async runtime")?;
    runtime
        .block_on(scribbleval_service::serve(config))
        .with_context(|| format!("serving on {addr}"))?;
    Ok(())
}

/// Split one `--set key=value` argument.
pub fn parse_override(raw: &str) -> Result<(String, String)> {
    match raw.split_once('=') {
        Some((key, value)) if !key.trim().is_empty() => {
            Ok((key.trim().to_owned(), value.trim().to_owned()))
        }
        _ => bail!("override {raw:?} is not key=value"),
    }
}
