//! Service configuration. Precedence is flags, then environment, then file.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

pub const ENV_BIND: &str = "CASEFLOW_BIND";
pub const ENV_DATA_DIR: &str = "CASEFLOW_DATA_DIR";
pub const ENV_IDLE_EXPIRY: &str = "CASEFLOW_IDLE_EXPIRY_SECS";
pub const ENV_CORS_ORIGINS: &str = "CASEFLOW_CORS_ORIGINS";

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";
pub const DEFAULT_IDLE_EXPIRY_SECS: u64 = 24 * 60 * 60;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config file {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid value for {key}: {value:?}")]
    Invalid { key: String, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    /// Snapshot directory; sessions live in memory only when unset.
    pub data_dir: Option<PathBuf>,
    pub idle_expiry: Duration,
    /// Allowed browser origins; `*` allows any.
    pub cors_origins: Vec<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: DEFAULT_BIND.parse().expect("valid default"),
            data_dir: None,
            idle_expiry: Duration::from_secs(DEFAULT_IDLE_EXPIRY_SECS),
            cors_origins: Vec::new(),
        }
    }
}

/// One configuration layer; unset fields fall through to the next layer.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub bind: Option<String>,
    pub data_dir: Option<PathBuf>,
    pub idle_expiry_secs: Option<u64>,
    pub cors_origins: Option<Vec<String>>,
}

impl ConfigLayer {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn from_env(get: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let idle_expiry_secs = match get(ENV_IDLE_EXPIRY) {
            Some(v) => Some(v.trim().parse().map_err(|_| ConfigError::Invalid {
                key: ENV_IDLE_EXPIRY.into(),
                value: v.clone(),
            })?),
            None => None,
        };
        Ok(Self {
            bind: get(ENV_BIND),
            data_dir: get(ENV_DATA_DIR).map(PathBuf::from),
            idle_expiry_secs,
            cors_origins: get(ENV_CORS_ORIGINS).map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            }),
        })
    }

    fn over(self, lower: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            bind: self.bind.or(lower.bind),
            data_dir: self.data_dir.or(lower.data_dir),
            idle_expiry_secs: self.idle_expiry_secs.or(lower.idle_expiry_secs),
            cors_origins: self.cors_origins.or(lower.cors_origins),
        }
    }
}

impl ServiceConfig {
    /// Merges `flags` over `env` over `file` over the defaults.
    pub fn resolve(
        flags: ConfigLayer,
        env: ConfigLayer,
        file: ConfigLayer,
    ) -> Result<Self, ConfigError> {
        let merged = flags.over(env).over(file);
        let mut cfg = ServiceConfig::default();
        if let Some(b) = merged.bind {
            cfg.bind = b.parse().map_err(|_| ConfigError::Invalid {
                key: "bind".into(),
                value: b.clone(),
            })?;
        }
        cfg.data_dir = merged.data_dir;
        if let Some(secs) = merged.idle_expiry_secs {
            if secs == 0 {
                return Err(ConfigError::Invalid {
                    key: "idle_expiry_secs".into(),
                    value: "0".into(),
                });
            }
            cfg.idle_expiry = Duration::from_secs(secs);
        }
        if let Some(o) = merged.cors_origins {
            cfg.cors_origins = o;
        }
        Ok(cfg)
    }

    /// Reads the optional file and the process environment.
    pub fn load(flags: ConfigLayer, file: Option<&Path>) -> Result<Self, ConfigError> {
        let file = match file {
            Some(p) => ConfigLayer::from_file(p)?,
            None => ConfigLayer::default(),
        };
        let env = ConfigLayer::from_env(|k| std::env::var(k).ok())?;
        Self::resolve(flags, env, file)
    }
}
