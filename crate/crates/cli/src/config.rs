//! JSON run configuration shared by every command.
//!
//! Physical keys carry their unit in the name: `_ueV` for energies, `_ghz`
//! for rates, `_over_gamma` for amplitudes relative to the hopping γ, and
//! `_periods` for dimensionless times θ expressed in units of 2π.
//! Unknown keys are rejected at every level.

use std::f64::consts::TAU;
use std::path::Path;

use chargeq_core::dynamics::SimConfig;
use chargeq_core::model::ModelParams;
use chargeq_core::pulses::{NoiseRegistry, NoiseScope, NoiseSpec, PulseRegistry, PulseSpec};
use chargeq_core::sweep::{
    linspace, named_point, Execution, PopulationWindow, SweepGrid, DEFAULT_DEPHASING_RATES_GHZ,
    DEFAULT_NOISE_AMPLITUDES,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("config is not valid JSON: {0}")]
    Syntax(String),
    #[error("config field `{path}`: {message}")]
    Field { path: String, message: String },
    #[error("override {0:?} must have the form key.path=value")]
    OverrideSyntax(String),
    #[error("override key `{0}` does not exist")]
    UnknownOverride(String),
}

fn field(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        path: path.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    #[serde(rename = "J_ueV")]
    pub j_uev: f64,
    #[serde(rename = "Jp_ueV")]
    pub jp_uev: f64,
    #[serde(rename = "gamma_ueV")]
    pub gamma_uev: f64,
    #[serde(rename = "eps_ueV")]
    pub eps_uev: [f64; 4],
}

impl Default for ModelConfig {
    fn default() -> Self {
        let p = ModelParams::default();
        Self {
            j_uev: p.j,
            jp_uev: p.jp,
            gamma_uev: p.gamma,
            eps_uev: p.eps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseConfig {
    pub shape: String,
    pub gamma0_over_gamma: f64,
    /// σ_θ/2π.
    pub width_periods: f64,
    /// θ₀/2π; `null` uses the shape's default.
    pub center_periods: Option<f64>,
}

impl Default for PulseConfig {
    fn default() -> Self {
        let h = named_point("H").expect("built-in point");
        Self {
            shape: "square".into(),
            gamma0_over_gamma: h.gamma0_over_gamma,
            width_periods: h.p,
            center_periods: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub amplitude_over_gamma: f64,
    /// Correlation step Δθ/2π; `null` uses width/20.
    pub step_periods: Option<f64>,
    pub scope: NoiseScope,
    pub distribution: String,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        let n = NoiseSpec::off();
        Self {
            amplitude_over_gamma: n.amplitude,
            step_periods: None,
            scope: n.scope,
            distribution: n.distribution,
            seed: n.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionConfig {
    pub theta_max_periods: f64,
    pub dtheta_periods: f64,
    pub record_every: usize,
    pub initial_state: String,
    pub injection_dots: Vec<usize>,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        let s = SimConfig::default();
        Self {
            theta_max_periods: 2.0,
            dtheta_periods: 1e-4,
            record_every: s.record_every,
            initial_state: s.initial_state,
            injection_dots: s.injection_dots,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub gamma0_over_gamma: Vec<f64>,
    pub width_periods: Vec<f64>,
    pub base_seed: u64,
    /// Worker threads; `null` uses the available parallelism. Results do not depend on it.
    pub workers: Option<usize>,
    /// [lo, hi] in θ/2π for the maxima; `null` is the whole trajectory.
    pub window_periods: Option<[f64; 2]>,
    pub population_window: PopulationWindow,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            gamma0_over_gamma: linspace(1.0, 10.0, 20),
            width_periods: linspace(0.01, 0.10, 20),
            base_seed: 0,
            workers: None,
            window_periods: None,
            population_window: PopulationWindow::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudiesConfig {
    pub dephasing_rates_ghz: Vec<f64>,
    pub noise_amplitudes_over_gamma: Vec<f64>,
    pub noise_scopes: Vec<NoiseScope>,
}

impl Default for StudiesConfig {
    fn default() -> Self {
        Self {
            dephasing_rates_ghz: DEFAULT_DEPHASING_RATES_GHZ.to_vec(),
            noise_amplitudes_over_gamma: DEFAULT_NOISE_AMPLITUDES.to_vec(),
            noise_scopes: vec![NoiseScope::PulseOnly, NoiseScope::FullEvolution],
        }
    }
}

/// The full configuration document. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Named operating point (H, M or P). When set it fixes the pulse amplitude and width.
    pub point: Option<String>,
    pub model: ModelConfig,
    pub pulse: PulseConfig,
    pub noise: NoiseConfig,
    pub dephasing_ghz: f64,
    pub evolution: EvolutionConfig,
    pub sweep: SweepConfig,
    pub studies: StudiesConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            point: None,
            model: ModelConfig::default(),
            pulse: PulseConfig::default(),
            noise: NoiseConfig::default(),
            dephasing_ghz: 0.0,
            evolution: EvolutionConfig::default(),
            sweep: SweepConfig::default(),
            studies: StudiesConfig::default(),
        }
    }
}

/// Deserializes with the failing field path in the error.
pub fn from_value(value: Value) -> Result<Config, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        field(&path, e.into_inner().to_string())
    })
}

pub fn parse_str(text: &str) -> Result<Config, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    from_value(value)
}

pub fn load(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_str(&text)
}

/// Parses the value of a `key=value` override: JSON when it parses, a bare string otherwise.
fn override_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

impl Config {
    /// Applies `key.path=value` overrides to existing leaf keys.
    pub fn with_overrides(self, overrides: &[String]) -> Result<Config, ConfigError> {
        if overrides.is_empty() {
            return Ok(self);
        }
        let mut root = serde_json::to_value(&self).expect("config serializes");
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| ConfigError::OverrideSyntax(item.clone()))?;
            let key = key.trim().trim_start_matches("--");
            let mut slot = &mut root;
            for part in key.split('.') {
                slot = slot
                    .as_object_mut()
                    .and_then(|m| m.get_mut(part))
                    .ok_or_else(|| ConfigError::UnknownOverride(key.to_string()))?;
            }
            *slot = override_value(raw.trim());
        }
        from_value(root)
    }

    /// Applies the named point, if any, to the pulse amplitude and width.
    pub fn resolve_point(&mut self) -> Result<(), ConfigError> {
        if let Some(label) = &self.point {
            let pt = named_point(label).map_err(|e| field("point", e.to_string()))?;
            self.point = Some(pt.label.to_string());
            self.pulse.gamma0_over_gamma = pt.gamma0_over_gamma;
            self.pulse.width_periods = pt.p;
        }
        Ok(())
    }

    pub fn model_params(&self) -> ModelParams {
        ModelParams {
            eps: self.model.eps_uev,
            gamma: self.model.gamma_uev,
            j: self.model.j_uev,
            jp: self.model.jp_uev,
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            params: self.model_params(),
            pulse: PulseSpec {
                shape: self.pulse.shape.clone(),
                gamma0: self.pulse.gamma0_over_gamma,
                width_theta: TAU * self.pulse.width_periods,
                center_theta: self.pulse.center_periods.map(|c| TAU * c),
            },
            noise: NoiseSpec {
                amplitude: self.noise.amplitude_over_gamma,
                step_theta: self.noise.step_periods.map(|s| TAU * s),
                scope: self.noise.scope,
                distribution: self.noise.distribution.clone(),
                seed: self.noise.seed,
            },
            dephasing_rate_ghz: self.dephasing_ghz,
            theta_max: TAU * self.evolution.theta_max_periods,
            dtheta: TAU * self.evolution.dtheta_periods,
            initial_state: self.evolution.initial_state.clone(),
            record_every: self.evolution.record_every,
            injection_dots: self.evolution.injection_dots.clone(),
            store_states: false,
        }
    }

    pub fn sweep_grid(&self) -> SweepGrid {
        SweepGrid {
            gamma0_over_gamma: self.sweep.gamma0_over_gamma.clone(),
            p_values: self.sweep.width_periods.clone(),
            base_config: self.sim_config(),
            pulse_shape: self.pulse.shape.clone(),
            base_seed: self.sweep.base_seed,
            window: self.sweep.window_periods.map(|[lo, hi]| (TAU * lo, TAU * hi)),
            population_window: self.sweep.population_window,
        }
    }

    pub fn execution(&self) -> Execution {
        match self.sweep.workers {
            None => Execution::Auto,
            Some(1) => Execution::Serial,
            Some(n) => Execution::Parallel(Some(n)),
        }
    }

    /// Checks registry names and the single-run configuration.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let pulses = PulseRegistry::default();
        if !pulses.contains(&self.pulse.shape) {
            return Err(field(
                "pulse.shape",
                format!(
                    "unknown shape {:?} (available: {})",
                    self.pulse.shape,
                    pulses.names().join(", ")
                ),
            ));
        }
        NoiseRegistry::default()
            .get(&self.noise.distribution)
            .map_err(|e| field("noise.distribution", e.to_string()))?;
        self.sim_config()
            .validate()
            .map_err(|e| field("<config>", e.to_string()))?;
        Ok(())
    }

    pub fn validate_sweep(&self) -> Result<(), ConfigError> {
        self.validate()?;
        if let Some([lo, hi]) = self.sweep.window_periods {
            if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
                return Err(field(
                    "sweep.window_periods",
                    format!("[{lo}, {hi}] must satisfy lo < hi"),
                ));
            }
        }
        if self.sweep.workers == Some(0) {
            return Err(field("sweep.workers", "must be >= 1"));
        }
        self.sweep_grid().validate().map_err(|e| field("sweep", e.to_string()))
    }

    pub fn validate_studies(&self, need_scopes: bool) -> Result<(), ConfigError> {
        self.validate()?;
        if self.point.is_none() {
            return Err(field("point", "studies need a named point"));
        }
        let s = &self.studies;
        if s.dephasing_rates_ghz.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(field("studies.dephasing_rates_ghz", "rates must be finite and >= 0"));
        }
        if s.noise_amplitudes_over_gamma
            .iter()
            .any(|a| !(a.is_finite() && *a >= 0.0))
        {
            return Err(field(
                "studies.noise_amplitudes_over_gamma",
                "amplitudes must be finite and >= 0",
            ));
        }
        if need_scopes && (s.noise_scopes.is_empty() || s.noise_scopes.contains(&NoiseScope::Off)) {
            return Err(field(
                "studies.noise_scopes",
                "expected a non-empty list of pulse_only / full_evolution",
            ));
        }
        Ok(())
    }
}
