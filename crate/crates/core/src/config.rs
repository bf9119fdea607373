//! Run configuration: one TOML file, overridable from the command line.
//!
//! ```toml
//! seed = 42
//!
//! [paths]
//! corpus = "data/labeled.jsonl"
//! pool = "data/pool.jsonl"
//! events = "data/events.csv"
//! output = "out"
//!
//! [grid]
//! dims = [100, 500, 1000, 2000]
//! noise = [0.0, 0.2, 0.4, 0.6, 0.8]
//!
//! [hyper.random_forest]
//! trees = [50, 100, 200]
//! ```
//!
//! Relative paths in the file resolve against the file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{Format, DEFAULT_MIN_MAGNITUDE, DEFAULT_WINDOW_AFTER, DEFAULT_WINDOW_BEFORE};
use crate::error::{Error, Result};
use crate::eval::{ExperimentConfig, GridConfig, HyperGrid, SmoteConfig};
use crate::models::ModelKind;
use crate::pipeline::{FeatureConfig, LdaConfig};

/// Overrides `paths.output` unless `--out` is given.
pub const OUTPUT_ENV: &str = "QUAKEFILTER_OUT";
pub const DEFAULT_OUTPUT: &str = "out";
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub pool: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrepareConfig {
    /// Sample size; unset keeps every message.
    pub target: Option<usize>,
    pub stratify_by_day: bool,
    pub tolerance: f64,
    pub min_magnitude: f64,
    pub window_before: i64,
    pub window_after: i64,
    /// Corpus format; guessed from the extension when unset.
    pub format: Option<Format>,
}

impl Default for PrepareConfig {
    fn default() -> Self {
        PrepareConfig {
            target: None,
            stratify_by_day: true,
            tolerance: 0.10,
            min_magnitude: DEFAULT_MIN_MAGNITUDE,
            window_before: DEFAULT_WINDOW_BEFORE,
            window_after: DEFAULT_WINDOW_AFTER,
            format: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneConfig {
    pub model: ModelKind,
    pub dims: usize,
    pub noise: f64,
}

impl Default for TuneConfig {
    fn default() -> Self {
        TuneConfig {
            model: ModelKind::RandomForest,
            dims: 100,
            noise: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub paths: Paths,
    pub prepare: PrepareConfig,
    pub features: FeatureConfig,
    pub lda: LdaConfig,
    pub smote: SmoteConfig,
    pub grid: GridConfig,
    pub tune: TuneConfig,
    pub hyper: HyperGrid,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            paths: Paths::default(),
            prepare: PrepareConfig::default(),
            features: FeatureConfig::default(),
            lda: LdaConfig::default(),
            smote: SmoteConfig::default(),
            grid: GridConfig::default(),
            tune: TuneConfig::default(),
            hyper: HyperGrid::default(),
        }
    }
}

fn resolve(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.paths.corpus,
            &mut cfg.paths.pool,
            &mut cfg.paths.events,
            &mut cfg.paths.output,
        ] {
            resolve(base, p);
        }
        Ok(cfg)
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            features: self.features.clone(),
            lda: self.lda.clone(),
            smote: self.smote.clone(),
            grid: self.grid.clone(),
            hyper: self.hyper.clone(),
        }
    }

    /// `--out` flag, then the environment variable, then the file, then
    /// the default.
    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        if let Some(p) = std::env::var_os(OUTPUT_ENV).filter(|v| !v.is_empty()) {
            return PathBuf::from(p);
        }
        self.paths
            .output
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT))
    }

    pub fn corpus_format(&self, path: &Path) -> Format {
        self.prepare.format.unwrap_or_else(|| Format::from_path(path))
    }

    pub fn require_corpus(&self) -> Result<&Path> {
        let p = self
            .paths
            .corpus
            .as_deref()
            .ok_or_else(|| Error::Config("no corpus path (paths.corpus or --input)".into()))?;
        must_exist(p)?;
        Ok(p)
    }

    /// The pool is needed exactly when some noise level is positive.
    pub fn require_pool(&self, noise: &[f64]) -> Result<Option<&Path>> {
        let needed = noise.iter().any(|&p| p > 0.0);
        match (&self.paths.pool, needed) {
            (Some(p), _) => {
                must_exist(p)?;
                Ok(Some(p))
            }
            (None, true) => Err(Error::Config(
                "noise levels above zero need a noise pool (paths.pool or --pool)".into(),
            )),
            (None, false) => Ok(None),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.prepare.tolerance) {
            return Err(Error::Config("prepare.tolerance must lie in [0, 1]".into()));
        }
        if self.prepare.target == Some(0) {
            return Err(Error::Config("prepare.target must be at least 1".into()));
        }
        if self.tune.dims == 0 || !(0.0..=1.0).contains(&self.tune.noise) {
            return Err(Error::Config("tune.dims must be positive and tune.noise in [0, 1]".into()));
        }
        self.experiment().validate()
    }
}

fn must_exist(p: &Path) -> Result<()> {
    if p.exists() {
        Ok(())
    } else {
        Err(Error::Config(format!("{} does not exist", p.display())))
    }
}
