use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use streamviz::scraper::{default_stoplist, parse_stoplist, FeedSource, FilterConfig};
use streamviz::session::SessionConfig;
use streamviz::settings;

/// Configuration problem; reported with exit status 1.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterSettings {
    /// Stop-list file; the built-in list when unset.
    pub stoplist: Option<PathBuf>,
    /// Optional second list merged into the stop list.
    pub obscene: Option<PathBuf>,
    pub min_len: usize,
    pub max_len: usize,
    pub strip_markup: bool,
}

impl Default for FilterSettings {
    fn default() -> Self {
        Self {
            stoplist: None,
            obscene: None,
            min_len: 3,
            max_len: 20,
            strip_markup: true,
        }
    }
}

impl FilterSettings {
    pub fn load(&self) -> anyhow::Result<FilterConfig> {
        let mut stoplist = match &self.stoplist {
            Some(path) => parse_stoplist(
                &fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
            ),
            None => default_stoplist(),
        };
        if let Some(path) = &self.obscene {
            stoplist.extend(parse_stoplist(
                &fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
            ));
        }
        let config = FilterConfig {
            stoplist,
            min_len: self.min_len,
            max_len: self.max_len,
            strip_markup: self.strip_markup,
        };
        config.validate().map_err(|e| config_error(e.to_string()))?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServerSettings {
    pub bind: String,
    /// Directory with the browser client, served at `/`.
    pub static_dir: Option<PathBuf>,
    /// Where article records arrive: `stdin` or `tcp:host:port`.
    pub intake: String,
}

impl Default for ServerSettings {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8080".into(),
            static_dir: None,
            intake: "stdin".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CliConfig {
    #[serde(flatten)]
    pub session: SessionConfig,
    pub filter: FilterSettings,
    pub source: FeedSource,
    pub server: ServerSettings,
}

impl CliConfig {
    /// Defaults, then the config file, then `overrides` in order.
    pub fn load(
        file: Option<&PathBuf>,
        overrides: &[(String, String)],
        seed: Option<u64>,
    ) -> anyhow::Result<Self> {
        let reference = serde_json::to_value(CliConfig::default())?;
        let mut doc = reference.clone();
        if let Some(path) = file {
            let text = fs::read_to_string(path)
                .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
            let patch: Value = serde_json::from_str(&text).map_err(|e| {
                config_error(format!("config {} is not valid JSON: {e}", path.display()))
            })?;
            if let Some(key) = settings::find_unknown_key(&patch, &reference) {
                return Err(config_error(format!("unknown config key `{key}`")));
            }
            settings::merge(&mut doc, patch);
        }
        for (path, raw) in overrides {
            settings::set_path(&mut doc, path, settings::parse_value(raw))
                .map_err(|e| config_error(e.to_string()))?;
        }
        if let Some(seed) = seed {
            doc["rng_seed"] = seed.into();
        }
        let config: CliConfig = serde_json::from_value(doc)
            .map_err(|e| config_error(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.session
            .validate()
            .map_err(|e| config_error(e.to_string()))?;
        for path in [
            &self.filter.stoplist,
            &self.filter.obscene,
            &self.server.static_dir,
        ]
        .into_iter()
        .flatten()
        {
            if !path.exists() {
                return Err(config_error(format!(
                    "path {} does not exist",
                    path.display()
                )));
            }
        }
        if !self.source.location.is_empty() {
            self.source
                .validate()
                .map_err(|e| config_error(e.to_string()))?;
        }
        Ok(())
    }
}

/// Top-level keys of the configuration document that hold plain values.
pub fn top_level_keys() -> Vec<String> {
    match serde_json::to_value(CliConfig::default()) {
        Ok(Value::Object(map)) => map
            .into_iter()
            .filter(|(_, v)| !v.is_object())
            .map(|(k, _)| k)
            .collect(),
        _ => Vec::new(),
    }
}

/// Splits `--a.b value` and `--a.b=value` pairs out of the arguments.
/// Dotted flags and flags named after a top-level key are configuration
/// overrides; everything else goes to clap.
pub fn split_overrides(
    args: Vec<String>,
    top_level: &[String],
) -> anyhow::Result<(Vec<String>, Vec<(String, String)>)> {
    let mut rest = Vec::with_capacity(args.len());
    let mut overrides = Vec::new();
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        if arg == "--" {
            rest.push(arg);
            rest.extend(iter.by_ref());
            break;
        }
        let Some(flag) = arg.strip_prefix("--") else {
            rest.push(arg);
            continue;
        };
        let (key, inline) = match flag.split_once('=') {
            Some((k, v)) => (k, Some(v.to_owned())),
            None => (flag, None),
        };
        if !key.contains('.') && !top_level.iter().any(|k| k == key) {
            rest.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => iter
                .next()
                .ok_or_else(|| config_error(format!("missing value for --{key}")))?,
        };
        overrides.push((key.to_owned(), value));
    }
    Ok((rest, overrides))
}
