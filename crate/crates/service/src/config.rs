//! Server settings: built-in defaults, then an optional TOML file, then
//! environment variables and command-line flags.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_DATA_DIR: &str = "exdialog-data";
pub const DEFAULT_TIMEOUT_SECS: u64 = 30 * 60;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
}

/// Any subset of the settings, as found in a config file or on the command line.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub data_dir: Option<PathBuf>,
    pub port: Option<u16>,
    pub session_timeout_secs: Option<u64>,
}

impl PartialConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.into(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.into(),
            source,
        })
    }

    /// Fields set in `over` win.
    pub fn merge(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            data_dir: over.data_dir.or(self.data_dir),
            port: over.port.or(self.port),
            session_timeout_secs: over.session_timeout_secs.or(self.session_timeout_secs),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub port: u16,
    pub session_timeout: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            data_dir: PathBuf::from(DEFAULT_DATA_DIR),
            port: DEFAULT_PORT,
            session_timeout: Duration::from_secs(DEFAULT_TIMEOUT_SECS),
        }
    }
}

impl ServiceConfig {
    /// Layers `overrides` on top of `file` (if given) on top of the defaults.
    pub fn load(file: Option<&Path>, overrides: PartialConfig) -> Result<Self, ConfigError> {
        let from_file = file.map(PartialConfig::from_file).transpose()?.unwrap_or_default();
        let p = from_file.merge(overrides);
        let d = ServiceConfig::default();
        Ok(ServiceConfig {
            data_dir: p.data_dir.unwrap_or(d.data_dir),
            port: p.port.unwrap_or(d.port),
            session_timeout: p.session_timeout_secs.map_or(d.session_timeout, Duration::from_secs),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layering() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exdialog.toml");
        std::fs::write(&path, "port = 9000\nsession_timeout_secs = 5\n").unwrap();
        let cfg = ServiceConfig::load(
            Some(&path),
            PartialConfig {
                port: Some(9100),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(cfg.port, 9100);
        assert_eq!(cfg.session_timeout, Duration::from_secs(5));
        assert_eq!(cfg.data_dir, PathBuf::from(DEFAULT_DATA_DIR));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "prot = 1\n").unwrap();
        assert!(matches!(
            ServiceConfig::load(Some(&path), PartialConfig::default()),
            Err(ConfigError::Parse { .. })
        ));
    }
}
