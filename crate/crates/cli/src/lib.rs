//! Demo runner and data emitter for the qkin toolkit: reproducible runs of
//! the steering example, decoherence sweeps, tomography scaling, and the
//! information-loss pipeline, driven by JSON configs with fixed seeds.

pub mod decoherence;
pub mod fmt;
pub mod infoloss;
pub mod steering;
pub mod tomography;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QKIN_OUT_DIR";

/// Which demo a config requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemoKind {
    Steering,
    Decoherence,
    Tomography,
    Infoloss,
}

/// One run request: demo, seed, demo-specific params, optional output dir.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub demo: DemoKind,
    pub seed: u64,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        Ok(config)
    }
}

/// Command-line overrides applied on top of the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub threshold: Option<f64>,
    pub parallel: Option<usize>,
}

/// Result of one demo run.
#[derive(Debug)]
pub struct RunOutcome {
    /// True when every configured check passed.
    pub pass: bool,
    /// Files written, in creation order.
    pub artifacts: Vec<PathBuf>,
}

/// Resolve the output directory: CLI flag, then config, then `QKIN_OUT_DIR`,
/// then `./out`.
pub fn resolve_output_dir(config: &RunConfig, overrides: &Overrides) -> PathBuf {
    if let Some(dir) = &overrides.out {
        return dir.clone();
    }
    if let Some(dir) = &config.output_dir {
        return dir.clone();
    }
    if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from("out")
}

/// Run the demo named by the config; artifacts land in the resolved
/// output directory.
pub fn run(config: &RunConfig, overrides: &Overrides) -> Result<RunOutcome> {
    let out_dir = resolve_output_dir(config, overrides);
    fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create output dir {}", out_dir.display()))?;
    let parallel = overrides.parallel.unwrap_or(1);
    if parallel == 0 {
        bail!("--parallel must be at least 1");
    }
    match config.demo {
        DemoKind::Steering => steering::run(config, &out_dir),
        DemoKind::Decoherence => decoherence::run(config, &out_dir, overrides.threshold),
        DemoKind::Tomography => tomography::run(config, &out_dir, parallel),
        DemoKind::Infoloss => infoloss::run(config, &out_dir, parallel),
    }
}

/// Parse the demo-specific params object.
pub(crate) fn parse_params<P: for<'de> Deserialize<'de>>(config: &RunConfig) -> Result<P> {
    serde_json::from_value(config.params.clone()).context("invalid demo params")
}

/// Write pretty JSON with a trailing newline; byte-stable for equal inputs.
pub(crate) fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).context("serialize JSON artifact")?;
    bytes.push(b'\n');
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parses_with_defaults() {
        let config: RunConfig = serde_json::from_str(r#"{"demo": "steering", "seed": 7}"#).unwrap();
        assert_eq!(config.demo, DemoKind::Steering);
        assert_eq!(config.seed, 7);
        assert!(config.output_dir.is_none());
    }

    #[test]
    fn unknown_demo_is_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"demo": "magic", "seed": 1}"#);
        assert!(err.is_err());
    }

    #[test]
    fn missing_seed_is_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"demo": "steering"}"#);
        assert!(err.is_err());
    }

    #[test]
    fn output_dir_priority() {
        let config: RunConfig =
            serde_json::from_str(r#"{"demo": "steering", "seed": 1, "output_dir": "cfg"}"#)
                .unwrap();
        let with_flag = Overrides {
            out: Some(PathBuf::from("flag")),
            ..Default::default()
        };
        assert_eq!(
            resolve_output_dir(&config, &with_flag),
            PathBuf::from("flag")
        );
        assert_eq!(
            resolve_output_dir(&config, &Overrides::default()),
            PathBuf::from("cfg")
        );
    }
}
