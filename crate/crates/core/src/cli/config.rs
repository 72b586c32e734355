use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::maps::{MapDescriptor, SelfMap, DEFAULT_GRID};
use crate::spaces::SpaceSpec;

pub const DEFAULT_TRUNCATION: usize = 64;
pub const DEFAULT_SEED: u64 = 0x5eed_c0de;
pub const SEED_ENV: &str = "COPOL_SEED";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("truncation order must be at least 4, got {0}")]
    Truncation(usize),
    #[error("tolerance `{name}` must be a positive finite number, got {value}")]
    Tolerance { name: &'static str, value: f64 },
    #[error("map `{name}`: {reason}")]
    Map { name: String, reason: String },
    #[error("{SEED_ENV} must be an unsigned integer, got `{0}`")]
    SeedEnv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Named tolerances. Every field is optional in the JSON document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Entry-level agreement of exact quantities (rebuilds, recovered symbols).
    pub exactness: f64,
    /// A defect below this counts as zero.
    pub defect_zero: f64,
    /// Agreement of norm estimates with a target or bound.
    pub norm_agreement: f64,
    /// Coefficient vs quadrature inner products.
    pub quadrature: f64,
    /// Norm estimates whose exact value is known.
    pub norm_exact: f64,
    /// Kernel identity residuals.
    pub kernel: f64,
    /// Truncated kernels vs closed forms.
    pub closed_form: f64,
    /// Multiplicativity defect on monomial pairs.
    pub almost_mult: f64,
    /// Monomial norms vs Gamma-function values.
    pub monomial_norm: f64,
    /// Entrywise agreement of the exact block between `N` and `2N`.
    pub honesty: f64,
    /// Smallest isometry defect accepted as "clearly not an isometry".
    pub defect_floor: f64,
    /// Same, for products with one rotation factor.
    pub mixed_defect_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            exactness: 1e-12,
            defect_zero: 1e-10,
            norm_agreement: 1e-6,
            quadrature: 1e-10,
            norm_exact: 1e-8,
            kernel: 1e-8,
            closed_form: 1e-10,
            almost_mult: 1e-11,
            monomial_norm: 1e-11,
            honesty: 1e-14,
            defect_floor: 0.1,
            mixed_defect_floor: 0.05,
        }
    }
}

impl Tolerances {
    pub fn named(&self) -> [(&'static str, f64); 12] {
        [
            ("exactness", self.exactness),
            ("defect_zero", self.defect_zero),
            ("norm_agreement", self.norm_agreement),
            ("quadrature", self.quadrature),
            ("norm_exact", self.norm_exact),
            ("kernel", self.kernel),
            ("closed_form", self.closed_form),
            ("almost_mult", self.almost_mult),
            ("monomial_norm", self.monomial_norm),
            ("honesty", self.honesty),
            ("defect_floor", self.defect_floor),
            ("mixed_defect_floor", self.mixed_defect_floor),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_space")]
    pub space: SpaceSpec,
    #[serde(default)]
    pub maps: BTreeMap<String, MapDescriptor>,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_space() -> SpaceSpec {
    SpaceSpec::WeightedBergman { alpha: 0.0 }
}

fn default_truncation() -> usize {
    DEFAULT_TRUNCATION
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            space: default_space(),
            maps: BTreeMap::new(),
            truncation: DEFAULT_TRUNCATION,
            tolerances: Tolerances::default(),
            seed: DEFAULT_SEED,
            output: OutputSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.truncation < 4 {
            return Err(ConfigError::Truncation(self.truncation));
        }
        for (name, value) in self.tolerances.named() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ConfigError::Tolerance { name, value });
            }
        }
        for name in self.maps.keys() {
            self.map(name)?;
        }
        Ok(())
    }

    /// The named map, built and validated.
    pub fn map(&self, name: &str) -> Result<SelfMap, ConfigError> {
        let d = self
            .maps
            .get(name)
            .ok_or_else(|| ConfigError::Map { name: name.to_string(), reason: "not defined".into() })?;
        d.to_self_map(DEFAULT_GRID).map_err(|e| ConfigError::Map { name: name.to_string(), reason: e.to_string() })
    }

    /// Applies the `COPOL_SEED` override.
    pub fn apply_seed_env(&mut self, value: Option<&str>) -> Result<(), ConfigError> {
        if let Some(v) = value {
            self.seed = v.trim().parse().map_err(|_| ConfigError::SeedEnv(v.to_string()))?;
        }
        Ok(())
    }
}
