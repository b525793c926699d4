use std::path::{Path, PathBuf};

use abspec::config::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Paths and settings shared by the subcommands. Every field can be given in
/// a TOML file and overridden by flags.
///
/// ```toml
/// corpus_dir = "articles"
/// kb = "kb.sqlite"
/// k = 5
///
/// [train]
/// epochs = 20
/// head_variant = "AOA_CLS"
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus_dir: Option<PathBuf>,
    pub spec_data: Option<PathBuf>,
    pub link_data: Option<PathBuf>,
    pub spec_model: Option<PathBuf>,
    pub link_model: Option<PathBuf>,
    pub kb: Option<PathBuf>,
    pub dictionary: Option<PathBuf>,
    /// Worker threads for per-article and per-fold parallelism; 0 means one per core.
    pub workers: usize,
    pub k: Option<usize>,
    pub stratified: bool,
    pub train: TrainConfig,
}

impl PipelineConfig {
    pub fn from_toml(raw: &str) -> CliResult<Self> {
        let cfg: PipelineConfig =
            toml::from_str(raw).map_err(|e| CliError::usage(format!("pipeline config: {e}")))?;
        cfg.train.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&raw)
    }
}

/// Returns `flag` if given, else `configured`, else a usage error naming `what`.
pub fn require(flag: Option<PathBuf>, configured: &Option<PathBuf>, what: &str) -> CliResult<PathBuf> {
    flag.or_else(|| configured.clone())
        .ok_or_else(|| CliError::usage(format!("missing {what}: pass the flag or set it in the config file")))
}
