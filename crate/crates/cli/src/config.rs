//! Run configuration layered from flags, environment and `cogen.toml`.

use std::collections::HashMap;
use std::net::IpAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use cogen_core::adapter::AdapterSpec;
use cogen_core::emitter::{Schema, StylePresetTable};
use cogen_core::extract::FIGMA_API_BASE;
use cogen_core::parser::Lexicon;
use serde::Deserialize;

pub const DEFAULT_CONFIG_FILE: &str = "cogen.toml";
pub const DEFAULT_PORT: u16 = 8787;
pub const DEFAULT_CACHE_DIR: &str = ".cogen-cache";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("port {0} is outside 1024..=65535")]
    BadPort(u64),
    #[error("invalid value {value:?} for {key}: {reason}")]
    BadValue { key: &'static str, value: String, reason: String },
    #[error("cannot read config file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config file {path}: {message}")]
    Syntax { path: PathBuf, message: String },
}

/// Every setting as it may appear in one layer. Unset fields fall through to
/// the next layer.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub adapter: Option<String>,
    pub schema: Option<String>,
    pub presets: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub port: Option<u64>,
    pub bind: Option<String>,
    pub token: Option<String>,
    pub cache_dir: Option<PathBuf>,
    pub timeout_secs: Option<u64>,
    pub figma_api: Option<String>,
}

impl ConfigLayer {
    pub fn from_toml(raw: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(raw).map_err(|e| ConfigError::Syntax { path: path.to_path_buf(), message: e.to_string() })
    }

    /// Reads `path`; a missing file is an empty layer unless `required`.
    pub fn load(path: &Path, required: bool) -> Result<Self, ConfigError> {
        match std::fs::read_to_string(path) {
            Ok(raw) => Self::from_toml(&raw, path),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound && !required => Ok(Self::default()),
            Err(source) => Err(ConfigError::Io { path: path.to_path_buf(), source }),
        }
    }

    /// `COGEN_<FIELD>` variables, plus `FIGMA_TOKEN` for the token.
    pub fn from_env(vars: &HashMap<String, String>) -> Result<Self, ConfigError> {
        let get = |k: &str| vars.get(k).filter(|v| !v.is_empty()).cloned();
        let number = |key: &'static str| -> Result<Option<u64>, ConfigError> {
            get(key)
                .map(|v| {
                    v.trim().parse().map_err(|_| ConfigError::BadValue {
                        key,
                        value: v.clone(),
                        reason: "expected a non-negative integer".into(),
                    })
                })
                .transpose()
        };
        Ok(ConfigLayer {
            adapter: get("COGEN_ADAPTER"),
            schema: get("COGEN_SCHEMA"),
            presets: get("COGEN_PRESETS").map(PathBuf::from),
            lexicon: get("COGEN_LEXICON").map(PathBuf::from),
            seed: number("COGEN_SEED")?,
            out: get("COGEN_OUT").map(PathBuf::from),
            port: number("COGEN_PORT")?,
            bind: get("COGEN_BIND"),
            token: get("FIGMA_TOKEN"),
            cache_dir: get("COGEN_CACHE_DIR").map(PathBuf::from),
            timeout_secs: number("COGEN_TIMEOUT_SECS")?,
            figma_api: get("COGEN_FIGMA_API"),
        })
    }

    /// Fields of `self` win over those of `lower`.
    pub fn over(self, lower: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            adapter: self.adapter.or(lower.adapter),
            schema: self.schema.or(lower.schema),
            presets: self.presets.or(lower.presets),
            lexicon: self.lexicon.or(lower.lexicon),
            seed: self.seed.or(lower.seed),
            out: self.out.or(lower.out),
            port: self.port.or(lower.port),
            bind: self.bind.or(lower.bind),
            token: self.token.or(lower.token),
            cache_dir: self.cache_dir.or(lower.cache_dir),
            timeout_secs: self.timeout_secs.or(lower.timeout_secs),
            figma_api: self.figma_api.or(lower.figma_api),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub adapter: AdapterSpec,
    pub schema: Schema,
    pub presets: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub port: u16,
    pub bind: IpAddr,
    pub token: Option<String>,
    pub cache_dir: PathBuf,
    pub timeout: Duration,
    /// Base URL of the Figma REST API.
    pub figma_api: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::resolve(ConfigLayer::default()).expect("defaults are valid")
    }
}

impl RunConfig {
    /// Validates a merged layer and fills in defaults.
    pub fn resolve(layer: ConfigLayer) -> Result<Self, ConfigError> {
        let bad = |key, value: &str, reason: String| ConfigError::BadValue { key, value: value.to_string(), reason };
        let schema = match &layer.schema {
            Some(s) => s.parse().map_err(|e| bad("schema", s, e))?,
            None => Schema::Flat,
        };
        let adapter = match &layer.adapter {
            Some(a) => a.parse().map_err(|e| bad("adapter", a, e))?,
            None => AdapterSpec::Generator(schema),
        };
        let port = layer.port.unwrap_or(u64::from(DEFAULT_PORT));
        if !(1024..=65535).contains(&port) {
            return Err(ConfigError::BadPort(port));
        }
        let bind = match &layer.bind {
            Some(b) => b.parse().map_err(|e: std::net::AddrParseError| bad("bind", b, e.to_string()))?,
            None => IpAddr::from([127, 0, 0, 1]),
        };
        Ok(RunConfig {
            adapter,
            schema,
            presets: layer.presets,
            lexicon: layer.lexicon,
            seed: layer.seed.unwrap_or(0),
            out: layer.out,
            port: port as u16,
            bind,
            token: layer.token,
            cache_dir: layer.cache_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR)),
            timeout: Duration::from_secs(layer.timeout_secs.unwrap_or(30)),
            figma_api: layer.figma_api.unwrap_or_else(|| FIGMA_API_BASE.to_string()),
        })
    }

    /// Flags over environment over config file.
    pub fn layered(flags: ConfigLayer, env: &HashMap<String, String>, file: ConfigLayer) -> Result<Self, ConfigError> {
        Self::resolve(flags.over(ConfigLayer::from_env(env)?.over(file)))
    }

    pub fn load_presets(&self) -> anyhow::Result<StylePresetTable> {
        Ok(match &self.presets {
            Some(path) => StylePresetTable::load(path)?,
            None => StylePresetTable::builtin().clone(),
        })
    }

    pub fn load_lexicon(&self) -> anyhow::Result<Lexicon> {
        Ok(match &self.lexicon {
            Some(path) => Lexicon::load(path)?,
            None => Lexicon::builtin().clone(),
        })
    }
}
