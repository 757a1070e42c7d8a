//! The `presy.json` configuration file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{EngineSpec, ProviderRegistry, SearchError};
use crate::text::AntiDictionaries;

pub const CONFIG_FILE: &str = "presy.json";
pub const CONFIG_ENV: &str = "PRESY_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("engine {id:?}: {source}")]
    Engine {
        id: String,
        #[source]
        source: SearchError,
    },
}

/// Declared search engines, registered in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    #[serde(default)]
    pub engines: Vec<EngineSpec>,
    /// Directory that relative corpus paths resolve against. Set to the
    /// config file's directory on load.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let raw = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config: Config = serde_json::from_str(&raw).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        config.base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        Ok(config)
    }

    /// The explicit path if given, otherwise `presy.json` inside the data
    /// directory when it exists.
    pub fn locate(explicit: Option<&Path>, data_dir: &Path) -> Option<PathBuf> {
        match explicit {
            Some(p) => Some(p.to_path_buf()),
            None => {
                let candidate = data_dir.join(CONFIG_FILE);
                candidate.is_file().then_some(candidate)
            }
        }
    }

    pub fn build_registry(&self, dictionaries: &AntiDictionaries) -> Result<ProviderRegistry, ConfigError> {
        let registry = ProviderRegistry::new();
        for spec in &self.engines {
            registry
                .register_spec(spec, &self.base_dir, dictionaries)
                .map_err(|source| ConfigError::Engine {
                    id: spec.id.clone(),
                    source,
                })?;
        }
        Ok(registry)
    }
}
