//! Application configuration: a TOML file, then `ACESUM_*` environment
//! variables for paths, then command-line flags.

use std::path::{Path, PathBuf};

use acesum_core::eval::Aggregation;
use acesum_core::mil::TrainConfig;
use acesum_core::summarizer::SummarizerConfig;
use acesum_core::synthesis::SynthConfig;
use serde::{Deserialize, Serialize};

use crate::AppError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub aspects: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub eval_set: Option<PathBuf>,
    /// Output of `label`.
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub host: String,
    pub port: u16,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self { host: "127.0.0.1".into(), port: 8080 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub aggregation: Aggregation,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub paths: Paths,
    pub train: TrainConfig,
    pub synthesis: SynthConfig,
    pub summarizer: SummarizerConfig,
    pub eval: EvalConfig,
    pub service: ServiceConfig,
}

/// Environment variables that override `[paths]` entries.
pub const PATH_VARS: [(&str, &str); 7] = [
    ("ACESUM_CORPUS", "corpus"),
    ("ACESUM_ASPECTS", "aspects"),
    ("ACESUM_EMBEDDINGS", "embeddings"),
    ("ACESUM_MODEL", "model"),
    ("ACESUM_DATASET", "dataset"),
    ("ACESUM_EVAL_SET", "eval_set"),
    ("ACESUM_LABELS", "labels"),
];

impl Paths {
    fn slot(&mut self, key: &str) -> &mut Option<PathBuf> {
        match key {
            "corpus" => &mut self.corpus,
            "aspects" => &mut self.aspects,
            "embeddings" => &mut self.embeddings,
            "model" => &mut self.model,
            "dataset" => &mut self.dataset,
            "eval_set" => &mut self.eval_set,
            "labels" => &mut self.labels,
            _ => unreachable!("unknown path key {key}"),
        }
    }

    /// Resolves relative paths against `base`.
    fn rebase(&mut self, base: &Path) {
        for (_, key) in PATH_VARS {
            if let Some(p) = self.slot(key) {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
    }
}

impl AppConfig {
    /// Parses TOML; relative paths stay relative.
    pub fn from_toml(content: &str) -> Result<Self, AppError> {
        toml::from_str(content).map_err(|e| AppError::Config(e.to_string()))
    }

    /// Reads a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, AppError> {
        let content = std::fs::read_to_string(path).map_err(|e| AppError::Io(path.display().to_string(), e))?;
        let mut config = Self::from_toml(&content)?;
        if let Some(dir) = path.parent() {
            config.paths.rebase(dir);
        }
        Ok(config)
    }

    /// Applies path overrides from `lookup`, which maps a variable name to
    /// its value.
    pub fn apply_env_with(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        for (var, key) in PATH_VARS {
            if let Some(v) = lookup(var).filter(|v| !v.is_empty()) {
                *self.paths.slot(key) = Some(PathBuf::from(v));
            }
        }
    }

    pub fn apply_env(&mut self) {
        self.apply_env_with(|k| std::env::var(k).ok());
    }

    pub fn validate(&self) -> Result<(), AppError> {
        self.train.validate().map_err(|e| AppError::Config(e.to_string()))?;
        self.synthesis.validate().map_err(AppError::Config)?;
        self.summarizer.validate().map_err(|e| AppError::Config(e.to_string()))?;
        Ok(())
    }
}

/// A configured path that must name an existing file.
pub fn input_path<'a>(path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, AppError> {
    let p = output_path(path, key)?;
    if !p.is_file() {
        return Err(AppError::Config(format!("{key} file {} does not exist", p.display())));
    }
    Ok(p)
}

/// A configured path that will be written.
pub fn output_path<'a>(path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, AppError> {
    path.as_deref().ok_or_else(|| {
        let var = PATH_VARS.iter().find(|(_, k)| *k == key).map(|(v, _)| *v).unwrap_or("");
        AppError::Config(format!("no {key} path configured (set paths.{key}, {var} or --{})", key.replace('_', "-")))
    })
}
