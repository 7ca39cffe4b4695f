//! Run configuration: one TOML document, overridable flag by flag.
//!
//! ```toml
//! threads = 1
//!
//! [paths]
//! train = "data/train.tsv"
//! valid = "data/valid.tsv"
//! test = "data/test.tsv"
//! rules = "data/rules.txt"
//! checkpoint_dir = "runs/fb15k"
//!
//! [rules]
//! min_confidence = 0.8
//!
//! [train]
//! dim = 200
//! negatives = 10
//! learning_rate = 0.5
//! l2 = 0.01
//! slack_c = 0.01
//!
//! [eval]
//! tie_mode = "mid"
//! ```
//!
//! Precedence: built-in defaults, then the config file, then command-line
//! flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::TieMode;
use crate::train::TrainConfig;

pub const DEFAULT_MIN_CONFIDENCE: f64 = 0.8;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub train: Option<PathBuf>,
    pub valid: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub checkpoint_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RulesConfig {
    pub min_confidence: f64,
}

impl Default for RulesConfig {
    fn default() -> Self {
        RulesConfig {
            min_confidence: DEFAULT_MIN_CONFIDENCE,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub tie_mode: TieMode,
    /// Optional per-triple rank dump.
    pub rank_dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Worker threads for grounding and evaluation; 0 lets the runtime pick.
    pub threads: usize,
    pub paths: PathsConfig,
    pub rules: RulesConfig,
    pub train: TrainConfig,
    pub eval: EvalConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Checks value ranges and that every configured input path exists.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rules.min_confidence) {
            return Err(Error::Config(format!(
                "min_confidence {} outside [0,1]",
                self.rules.min_confidence
            )));
        }
        self.train.validate()?;
        let inputs = [
            ("train", &self.paths.train),
            ("valid", &self.paths.valid),
            ("test", &self.paths.test),
            ("rules", &self.paths.rules),
        ];
        for (name, path) in inputs {
            if let Some(p) = path {
                if !p.is_file() {
                    return Err(Error::Config(format!("{name} file {} does not exist", p.display())));
                }
            }
        }
        Ok(())
    }

    pub fn require_train(&self) -> Result<&Path> {
        self.paths
            .train
            .as_deref()
            .ok_or_else(|| Error::Config("no training file configured".into()))
    }

    pub fn require_checkpoint_dir(&self) -> Result<&Path> {
        self.paths
            .checkpoint_dir
            .as_deref()
            .ok_or_else(|| Error::Config("no checkpoint directory configured".into()))
    }
}
