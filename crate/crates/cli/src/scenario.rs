//! Declarative job descriptions.

use std::path::Path;

use finslerlab::{
    DerivativeMode, FieldDescription, GeometryError, MetricDescription, MetricModel, SurfaceDescription, VolumeForm,
};
use finslerlab::isoparametric::{Sampling, SeedBox};
use serde::{Deserialize, Serialize};

pub const SCENARIO_SCHEMA: u32 = 1;
pub const DEFAULT_TOL: f64 = 1e-6;

/// Errors that map to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<GeometryError> for ConfigError {
    fn from(e: GeometryError) -> ConfigError {
        match e {
            GeometryError::Config(msg) => ConfigError(msg),
            e => ConfigError(format!("{}: {e}", e.kind())),
        }
    }
}

/// Level sampling for isoparametric checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSpec {
    pub values: Vec<f64>,
    #[serde(default = "default_per_level")]
    pub samples_per_level: usize,
    /// Defaults to `[−0.5, 0.5]^m`.
    #[serde(default)]
    pub boxes: Vec<SeedBox>,
    #[serde(default = "default_reach")]
    pub reach: f64,
}

fn default_per_level() -> usize {
    8
}

fn default_reach() -> f64 {
    4.0
}

/// Optional assertions for `surface-report`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    /// Sorted principal curvatures expected at every sample.
    #[serde(default)]
    pub principal_curvatures: Option<Vec<f64>>,
    /// Each principal curvature constant across samples.
    #[serde(default)]
    pub constant: Option<bool>,
    #[serde(default)]
    pub umbilic: Option<bool>,
    #[serde(default)]
    pub minimal: Option<bool>,
    /// Number of distinct principal curvatures.
    #[serde(default)]
    pub distinct: Option<usize>,
}

/// Switches for `reproduce-paper`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSpec {
    /// Runs the helicoid criteria on the sign-flipped profile.
    #[serde(default)]
    pub corrupted_phi: bool,
    /// Restricts the run to these criterion numbers.
    #[serde(default)]
    pub only: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "schema")]
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricDescription>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<VolumeForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceDescription>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldDescription>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<LevelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivatives: Option<DerivativeMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<SuiteSpec>,
}

fn schema() -> u32 {
    SCENARIO_SCHEMA
}

/// Command-line values that take precedence over the scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
    pub derivatives: Option<DerivativeMode>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, ConfigError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| ConfigError(format!("malformed scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Scenario, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Scenario::parse(&text)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCENARIO_SCHEMA {
            return Err(ConfigError(format!(
                "scenario schema {} is not supported (expected {SCENARIO_SCHEMA})",
                self.schema_version
            )));
        }
        if let Some(t) = self.tolerance {
            check_tolerance(t)?;
        }
        Ok(())
    }

    pub fn apply(mut self, o: &Overrides) -> Result<Scenario, ConfigError> {
        if let Some(t) = o.tolerance {
            check_tolerance(t)?;
            self.tolerance = Some(t);
        }
        self.seed = o.seed.or(self.seed);
        self.derivatives = o.derivatives.or(self.derivatives);
        Ok(self)
    }

    pub fn mode(&self) -> DerivativeMode {
        self.derivatives.unwrap_or_default()
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Scenario tolerance, or the default for the derivative mode.
    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(match self.mode() {
            DerivativeMode::Exact => DEFAULT_TOL,
            DerivativeMode::Fd => crate::suite::FD_TOL,
        })
    }

    pub fn metric(&self) -> Result<MetricModel, ConfigError> {
        let d = self
            .metric
            .as_ref()
            .ok_or_else(|| ConfigError("scenario has no metric".into()))?;
        Ok(d.build(self.mode())?)
    }

    pub fn surface(&self) -> Result<&SurfaceDescription, ConfigError> {
        self.surface
            .as_ref()
            .ok_or_else(|| ConfigError("scenario has no surface".into()))
    }

    pub fn sampling(&self, dim: usize) -> Result<Sampling, ConfigError> {
        let l = self
            .levels
            .as_ref()
            .ok_or_else(|| ConfigError("scenario has no levels".into()))?;
        if l.values.is_empty() {
            return Err(ConfigError("levels.values is empty".into()));
        }
        let boxes = if l.boxes.is_empty() {
            vec![SeedBox {
                lower: vec![-0.5; dim],
                upper: vec![0.5; dim],
            }]
        } else {
            l.boxes.clone()
        };
        Ok(Sampling {
            levels: l.values.clone(),
            samples_per_level: l.samples_per_level,
            boxes,
            reach: l.reach,
            seed: self.seed(),
        })
    }
}

fn check_tolerance(t: f64) -> Result<(), ConfigError> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(ConfigError(format!("tolerance must be positive, got {t}")))
    }
}

/// Independent stream for check number `index` of a run seeded with `seed`.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    // SplitMix64 finalizer over the pair.
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
