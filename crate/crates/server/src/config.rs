//! Campaign configuration file with environment overrides.

use std::path::{Path, PathBuf};

use farpls_core::campaign::{CampaignOptions, Mode};
use farpls_core::pipeline::{CLUSTERS_FILE, POOL_FILE};
use farpls_core::prompt::EngineConfig;
use farpls_core::similarity::CriterionWeights;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CONFIG_ENV: &str = "FARPLS_CONFIG";
pub const BIND_ENV: &str = "FARPLS_BIND";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: Box<toml::de::Error>,
    },
    #[error("{0} does not exist")]
    Missing(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterSettings {
    pub k: usize,
    pub seed: u64,
}

impl Default for ClusterSettings {
    fn default() -> Self {
        Self { k: 9, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleSettings {
    pub m: usize,
    pub seed: u64,
}

impl Default for SampleSettings {
    fn default() -> Self {
        Self { m: 30, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub mode: Mode,
    pub bind: String,
    /// Pipeline work directory holding trajectories and features.
    pub work_dir: PathBuf,
    /// Defaults to `pool.json` in the work directory.
    pub pool: Option<PathBuf>,
    /// Defaults to `clusters.json` in the work directory.
    pub clusters: Option<PathBuf>,
    /// Where `labels.jsonl` and `sessions.jsonl` live.
    pub data_dir: PathBuf,
    /// Static UI bundle served under `/`.
    pub static_dir: Option<PathBuf>,
    pub engine: EngineConfig,
    pub weights: CriterionWeights,
    pub cluster: ClusterSettings,
    pub sample: SampleSettings,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Farpls,
            bind: "127.0.0.1:8080".into(),
            work_dir: "farpls-work".into(),
            pool: None,
            clusters: None,
            data_dir: "farpls-campaign".into(),
            static_dir: None,
            engine: EngineConfig::default(),
            weights: CriterionWeights::default(),
            cluster: ClusterSettings::default(),
            sample: SampleSettings::default(),
        }
    }
}

impl CampaignConfig {
    /// Parses TOML; relative paths are taken from `base`.
    pub fn from_toml(text: &str, base: &Path, origin: &Path) -> Result<Self, ConfigError> {
        let mut config: Self = toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: origin.to_path_buf(),
            source: Box::new(source),
        })?;
        config.resolve(base);
        Ok(config)
    }

    /// Reads `path`, or `$FARPLS_CONFIG`, or falls back to defaults; then applies `$FARPLS_BIND`.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let from_env = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
        let mut config = match path.map(Path::to_path_buf).or(from_env) {
            Some(p) => {
                let text = std::fs::read_to_string(&p).map_err(|source| ConfigError::Read {
                    path: p.clone(),
                    source,
                })?;
                let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
                Self::from_toml(&text, &base, &p)?
            }
            None => Self::default(),
        };
        config.apply_bind_override(std::env::var(BIND_ENV).ok());
        Ok(config)
    }

    pub fn apply_bind_override(&mut self, bind: Option<String>) {
        if let Some(b) = bind.filter(|b| !b.trim().is_empty()) {
            self.bind = b;
        }
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.work_dir);
        join(&mut self.data_dir);
        for p in [&mut self.pool, &mut self.clusters, &mut self.static_dir]
            .into_iter()
            .flatten()
        {
            join(p);
        }
    }

    pub fn pool_path(&self) -> PathBuf {
        self.pool
            .clone()
            .unwrap_or_else(|| self.work_dir.join(POOL_FILE))
    }

    pub fn clusters_path(&self) -> PathBuf {
        self.clusters
            .clone()
            .unwrap_or_else(|| self.work_dir.join(CLUSTERS_FILE))
    }

    pub fn options(&self) -> CampaignOptions {
        CampaignOptions {
            mode: self.mode,
            engine: self.engine.clone(),
        }
    }

    /// Checks that the referenced inputs exist.
    pub fn check_inputs(&self) -> Result<(), ConfigError> {
        for p in [
            self.pool_path(),
            self.clusters_path(),
            self.work_dir.clone(),
        ] {
            if !p.exists() {
                return Err(ConfigError::Missing(p));
            }
        }
        Ok(())
    }
}
