//! Versioned experiment configuration, stored as TOML.

use std::path::{Path, PathBuf};

use netrecon_core::calibrate::{CalibrationTarget, ContagionFamily};
use netrecon_core::inference::{Hyperparameters, McmcConfig};
use netrecon_core::netgen::NetworkModelSpec;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Schema version written to and expected in every config file.
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("writing config: {0}")]
    Write(#[from] toml::ser::Error),
    #[error("config version {found} is not supported (expected {CONFIG_VERSION})")]
    Version { found: u32 },
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

/// A contagion to simulate and reconstruct in every repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContagionSpec {
    /// Name used in CSV columns and seed derivation.
    pub label: String,
    pub family: ContagionFamily,
    /// Tune `beta` so this contagion's intensity matches the reference
    /// (the first unmatched contagion) instead of using the cell's `beta`.
    #[serde(default)]
    pub matched: bool,
}

/// One structural parameter of the network family swept over `values`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkAxis {
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationScope {
    /// Use the cell's `beta` for every contagion.
    None,
    /// Match once per cell on the first repetition's network.
    #[default]
    PerCell,
    /// Match separately for every repetition's network.
    PerRepetition,
    /// Match on the first network-axis value and reuse the result along
    /// the axis.
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    pub scope: CalibrationScope,
    /// Simulations averaged into the reference intensity.
    pub reference_replicates: usize,
    pub target: CalibrationTarget,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            scope: CalibrationScope::PerCell,
            reference_replicates: 100,
            target: CalibrationTarget {
                batch: 4,
                relative: true,
                ..CalibrationTarget::default()
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    AllInfected,
    /// Each node infected independently with probability `fraction`.
    Random { fraction: f64 },
}

/// Beta prior pseudo-counts, shared by every `c_l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    pub a_c: f64,
    pub b_c: f64,
    pub a_gamma: f64,
    pub b_gamma: f64,
    pub a_rho: f64,
    pub b_rho: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            a_c: 1.0,
            b_c: 1.0,
            a_gamma: 1.0,
            b_gamma: 1.0,
            a_rho: 1.0,
            b_rho: 1.0,
        }
    }
}

impl PriorConfig {
    pub fn hyperparameters(&self, n: usize) -> Hyperparameters {
        Hyperparameters {
            a_c: vec![self.a_c; n],
            b_c: vec![self.b_c; n],
            a_gamma: self.a_gamma,
            b_gamma: self.b_gamma,
            a_rho: self.a_rho,
            b_rho: self.b_rho,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub name: String,
    pub seed: u64,
    pub network: NetworkModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network_axis: Option<NetworkAxis>,
    pub gamma: f64,
    /// Infection probability axis of the reference contagion.
    pub beta: Vec<f64>,
    /// Trace length axis.
    pub steps: Vec<usize>,
    pub repetitions: usize,
    pub contagions: Vec<ContagionSpec>,
    #[serde(default = "default_initial")]
    pub initial: InitialCondition,
    /// Count repetitions whose trace dies out as failures instead of
    /// reconstructing from them.
    #[serde(default)]
    pub discard_extinct: bool,
    #[serde(default)]
    pub calibration: CalibrationConfig,
    #[serde(default)]
    pub mcmc: McmcConfig,
    #[serde(default)]
    pub prior: PriorConfig,
    #[serde(default = "default_hdpi_mass")]
    pub hdpi_mass: f64,
}

fn default_initial() -> InitialCondition {
    InitialCondition::AllInfected
}

fn default_hdpi_mass() -> f64 {
    0.5
}

impl ExperimentConfig {
    /// Karate club, simple versus matched threshold contagion over a sweep
    /// of trace lengths, with a reduced sampler budget.
    pub fn karate_sweep() -> Self {
        Self {
            version: CONFIG_VERSION,
            name: "zkc-steps".into(),
            seed: 2024,
            network: NetworkModelSpec::Zkc,
            network_axis: None,
            gamma: 0.1,
            beta: vec![0.04],
            steps: vec![100, 1_000, 10_000],
            repetitions: 50,
            contagions: vec![
                ContagionSpec {
                    label: "simple".into(),
                    family: ContagionFamily::Simple,
                    matched: false,
                },
                ContagionSpec {
                    label: "complex".into(),
                    family: ContagionFamily::Threshold { tau: 2 },
                    matched: true,
                },
            ],
            initial: InitialCondition::AllInfected,
            discard_extinct: false,
            calibration: CalibrationConfig::default(),
            mcmc: McmcConfig {
                burn_in: 50_000,
                thinning: 5_000,
                n_samples: 20,
                n_chains: 1,
                init_density: 0.5,
            },
            prior: PriorConfig::default(),
            hdpi_mass: 0.5,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        #[derive(Deserialize)]
        struct Probe {
            version: Option<u32>,
        }
        let probe: Probe = toml::from_str(text)?;
        match probe.version {
            Some(CONFIG_VERSION) => {}
            Some(found) => return Err(ConfigError::Version { found }),
            None => return invalid("missing `version`"),
        }
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != CONFIG_VERSION {
            return Err(ConfigError::Version {
                found: self.version,
            });
        }
        if self.beta.is_empty() || self.steps.is_empty() {
            return invalid("the beta and steps axes must be nonempty");
        }
        if self.repetitions == 0 {
            return invalid("repetitions must be at least 1");
        }
        if self.steps.contains(&0) {
            return invalid("trace lengths must be positive");
        }
        if !(0.0..=1.0).contains(&self.gamma) || self.beta.iter().any(|b| !(0.0..=1.0).contains(b))
        {
            return invalid("gamma and beta values must lie in [0, 1]");
        }
        if !(self.hdpi_mass > 0.0 && self.hdpi_mass <= 1.0) {
            return invalid("hdpi_mass must lie in (0, 1]");
        }
        match self.contagions.len() {
            1 | 2 => {}
            n => return invalid(format!("expected one or two contagions, got {n}")),
        }
        if self.contagions.len() == 2 && self.contagions[0].label == self.contagions[1].label {
            return invalid("contagion labels must differ");
        }
        for c in &self.contagions {
            if c.label.is_empty() || !c.label.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_') {
                return invalid(format!("label {:?} must be nonempty [A-Za-z0-9_]", c.label));
            }
            c.family.with_beta(0.5).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        let any_matched = self.contagions.iter().any(|c| c.matched);
        if any_matched && self.reference().is_none() {
            return invalid("a matched contagion needs an unmatched reference contagion");
        }
        if any_matched && self.calibration.scope == CalibrationScope::None {
            return invalid("matched contagions need a calibration scope other than `none`");
        }
        if self.calibration.reference_replicates == 0 {
            return invalid("calibration.reference_replicates must be at least 1");
        }
        self.calibration
            .target
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.mcmc
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let InitialCondition::Random { fraction } = self.initial {
            if !(0.0..=1.0).contains(&fraction) {
                return invalid("initial fraction must lie in [0, 1]");
            }
        }
        if let Some(axis) = &self.network_axis {
            if axis.values.is_empty() {
                return invalid("network_axis.values must be nonempty");
            }
        }
        for k in 0..self.axis_len() {
            self.network_at(k)?;
        }
        Ok(())
    }

    /// The first unmatched contagion.
    pub fn reference(&self) -> Option<&ContagionSpec> {
        self.contagions.iter().find(|c| !c.matched)
    }

    pub fn axis_len(&self) -> usize {
        self.network_axis.as_ref().map_or(1, |a| a.values.len())
    }

    pub fn axis_value(&self, k: usize) -> Option<f64> {
        self.network_axis.as_ref().map(|a| a.values[k])
    }

    /// Network spec at position `k` of the network axis.
    pub fn network_at(&self, k: usize) -> Result<NetworkModelSpec, ConfigError> {
        let Some(axis) = &self.network_axis else {
            return Ok(self.network.clone());
        };
        let mut value = serde_json::to_value(&self.network)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let fields = value.as_object_mut().expect("specs serialize as maps");
        if axis.parameter == "model" || !fields.contains_key(&axis.parameter) {
            return invalid(format!(
                "network model has no parameter {:?}",
                axis.parameter
            ));
        }
        let v = axis.values[k];
        let number = if v.fract() == 0.0 && v.abs() < 9.0e15 {
            Value::from(v as i64)
        } else {
            Value::from(v)
        };
        fields.insert(axis.parameter.clone(), number);
        serde_json::from_value(value).map_err(|e| {
            ConfigError::Invalid(format!("{} = {v}: {e}", axis.parameter))
        })
    }

    pub fn hyperparameters(&self, n: usize) -> Hyperparameters {
        self.prior.hyperparameters(n)
    }

    /// Number of cells in the grid.
    pub fn cell_count(&self) -> usize {
        self.axis_len() * self.beta.len() * self.steps.len()
    }
}
