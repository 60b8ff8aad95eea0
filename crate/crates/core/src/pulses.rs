//! Gate-modulated injection rate Γ(θ).
//!
//! A pulse is a deterministic envelope (looked up by name in a
//! [`PulseRegistry`]) plus an optional piecewise-constant amplitude-noise
//! path δ(θ) drawn from a named [`NoiseDistribution`]. All rates here are in
//! units of the intra-qubit hopping γ; time is the dimensionless θ.
//!
//! Rates can be discontinuous (square edges, noise steps). Every
//! discontinuity is reported through [`RateProfile::breakpoints`], and
//! [`RateProfile::rate_on_piece`] evaluates the profile on the piece that
//! contains a probe point, so integrators never have to guess which side of
//! an edge they are on.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Gaussian envelopes are treated as zero beyond this many widths from the center.
pub const GAUSSIAN_TRUNCATION_WIDTHS: f64 = 6.0;
/// Default Gaussian center, in pulse widths.
pub const GAUSSIAN_DEFAULT_CENTER_WIDTHS: f64 = 3.0;
/// Default noise correlation step, as a fraction of the pulse width.
pub const DEFAULT_NOISE_STEPS_PER_WIDTH: f64 = 20.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PulseError {
    #[error("unknown pulse shape {name:?} (available: {available})")]
    UnknownShape { name: String, available: String },
    #[error("unknown noise distribution {name:?} (available: {available})")]
    UnknownDistribution { name: String, available: String },
    #[error("invalid pulse: {0}")]
    InvalidPulse(String),
    #[error("invalid noise: {0}")]
    InvalidNoise(String),
}

/// Deterministic envelope parameters. `gamma0` is Γ₀/γ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub shape: String,
    pub gamma0: f64,
    /// σ_θ = 2πp.
    pub width_theta: f64,
    /// θ₀; only used by centered shapes. Defaults to 3σ_θ.
    pub center_theta: Option<f64>,
}

impl PulseSpec {
    pub fn square(gamma0: f64, p: f64) -> Self {
        Self {
            shape: "square".into(),
            gamma0,
            width_theta: std::f64::consts::TAU * p,
            center_theta: None,
        }
    }

    pub fn gaussian(gamma0: f64, p: f64) -> Self {
        Self {
            shape: "gaussian".into(),
            ..Self::square(gamma0, p)
        }
    }

    /// σ_θ / 2π.
    pub fn width_fraction(&self) -> f64 {
        self.width_theta / std::f64::consts::TAU
    }

    pub fn validate(&self) -> Result<(), PulseError> {
        if !(self.gamma0.is_finite() && self.gamma0 >= 0.0) {
            return Err(PulseError::InvalidPulse(format!(
                "gamma0 = {} must be >= 0",
                self.gamma0
            )));
        }
        if !(self.width_theta.is_finite() && self.width_theta > 0.0) {
            return Err(PulseError::InvalidPulse(format!(
                "width_theta = {} must be > 0",
                self.width_theta
            )));
        }
        if let Some(c) = self.center_theta {
            if !c.is_finite() {
                return Err(PulseError::InvalidPulse("center_theta must be finite".into()));
            }
        }
        Ok(())
    }
}

/// A deterministic pulse envelope Γ(θ)/γ.
pub trait PulseEnvelope: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Envelope at `theta`, using the piece of the profile that contains `probe`.
    /// For continuous envelopes `probe` is ignored.
    fn value_on_piece(&self, theta: f64, probe: f64) -> f64;

    fn value(&self, theta: f64) -> f64 {
        self.value_on_piece(theta, theta)
    }

    /// End of the pulse, used to confine pulse-only noise.
    fn pulse_end(&self) -> f64;

    /// Points where the envelope is discontinuous.
    fn breakpoints(&self) -> Vec<f64>;
}

/// Γ₀ on [0, σ_θ), zero elsewhere.
#[derive(Debug, Clone)]
pub struct SquarePulse {
    gamma0: f64,
    width: f64,
}

impl SquarePulse {
    pub fn new(gamma0: f64, width: f64) -> Self {
        Self { gamma0, width }
    }
}

impl PulseEnvelope for SquarePulse {
    fn name(&self) -> &'static str {
        "square"
    }

    fn value_on_piece(&self, _theta: f64, probe: f64) -> f64 {
        if (0.0..self.width).contains(&probe) {
            self.gamma0
        } else {
            0.0
        }
    }

    fn pulse_end(&self) -> f64 {
        self.width
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![0.0, self.width]
    }
}

/// Γ₀·exp(−((θ−θ₀)/σ_θ)²), truncated beyond 6σ_θ from the center.
#[derive(Debug, Clone)]
pub struct GaussianPulse {
    gamma0: f64,
    width: f64,
    center: f64,
}

impl GaussianPulse {
    pub fn new(gamma0: f64, width: f64, center: f64) -> Self {
        Self { gamma0, width, center }
    }

    pub fn center(&self) -> f64 {
        self.center
    }
}

impl PulseEnvelope for GaussianPulse {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn value_on_piece(&self, theta: f64, probe: f64) -> f64 {
        let cutoff = GAUSSIAN_TRUNCATION_WIDTHS * self.width;
        if (probe - self.center).abs() > cutoff {
            return 0.0;
        }
        let x = (theta - self.center) / self.width;
        self.gamma0 * (-x * x).exp()
    }

    fn pulse_end(&self) -> f64 {
        self.center + GAUSSIAN_TRUNCATION_WIDTHS * self.width
    }

    fn breakpoints(&self) -> Vec<f64> {
        let cutoff = GAUSSIAN_TRUNCATION_WIDTHS * self.width;
        vec![self.center - cutoff, self.center + cutoff]
    }
}

pub type EnvelopeFactory = fn(&PulseSpec) -> Result<Box<dyn PulseEnvelope>, PulseError>;

fn build_square(spec: &PulseSpec) -> Result<Box<dyn PulseEnvelope>, PulseError> {
    Ok(Box::new(SquarePulse::new(spec.gamma0, spec.width_theta)))
}

fn build_gaussian(spec: &PulseSpec) -> Result<Box<dyn PulseEnvelope>, PulseError> {
    let center = spec
        .center_theta
        .unwrap_or(GAUSSIAN_DEFAULT_CENTER_WIDTHS * spec.width_theta);
    Ok(Box::new(GaussianPulse::new(spec.gamma0, spec.width_theta, center)))
}

/// Pulse shapes selectable by name.
#[derive(Clone)]
pub struct PulseRegistry {
    factories: BTreeMap<String, EnvelopeFactory>,
}

impl fmt::Debug for PulseRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}

impl Default for PulseRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("square", build_square);
        r.register("gaussian", build_gaussian);
        r
    }
}

impl PulseRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    /// Registers (or replaces) a shape.
    pub fn register(&mut self, name: &str, factory: EnvelopeFactory) {
        self.factories.insert(name.to_ascii_lowercase(), factory);
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(&name.to_ascii_lowercase())
    }

    pub fn build(&self, spec: &PulseSpec) -> Result<Box<dyn PulseEnvelope>, PulseError> {
        spec.validate()?;
        let factory = self
            .factories
            .get(&spec.shape.to_ascii_lowercase())
            .ok_or_else(|| PulseError::UnknownShape {
                name: spec.shape.clone(),
                available: self.names().join(", "),
            })?;
        factory(spec)
    }
}

/// Where amplitude noise acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseScope {
    #[default]
    Off,
    PulseOnly,
    FullEvolution,
}

/// A zero-mean distribution for noise draws, scaled by the amplitude.
pub trait NoiseDistribution: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn sample(&self, rng: &mut ChaCha8Rng, amplitude: f64) -> f64;
}

/// Uniform on (−A, A).
#[derive(Debug, Clone, Copy)]
pub struct UniformNoise;

impl NoiseDistribution for UniformNoise {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn sample(&self, rng: &mut ChaCha8Rng, amplitude: f64) -> f64 {
        amplitude * (2.0 * rng.gen::<f64>() - 1.0)
    }
}

/// Normal with mean 0 and standard deviation A.
#[derive(Debug, Clone, Copy)]
pub struct GaussianNoise;

impl NoiseDistribution for GaussianNoise {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn sample(&self, rng: &mut ChaCha8Rng, amplitude: f64) -> f64 {
        let standard: f64 = Normal::new(0.0, 1.0).expect("unit normal").sample(rng);
        amplitude * standard
    }
}

#[derive(Clone)]
pub struct NoiseRegistry {
    entries: BTreeMap<String, Arc<dyn NoiseDistribution>>,
}

impl fmt::Debug for NoiseRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}

impl Default for NoiseRegistry {
    fn default() -> Self {
        let mut r = Self {
            entries: BTreeMap::new(),
        };
        r.register(Arc::new(UniformNoise));
        r.register(Arc::new(GaussianNoise));
        r
    }
}

impl NoiseRegistry {
    pub fn register(&mut self, dist: Arc<dyn NoiseDistribution>) {
        self.entries.insert(dist.name().to_string(), dist);
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn NoiseDistribution>, PulseError> {
        self.entries
            .get(&name.to_ascii_lowercase())
            .cloned()
            .ok_or_else(|| PulseError::UnknownDistribution {
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }
}

/// Stochastic amplitude-noise configuration. `amplitude` is in units of γ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub amplitude: f64,
    /// Correlation step Δθ_n; defaults to σ_θ/20.
    pub step_theta: Option<f64>,
    pub scope: NoiseScope,
    pub distribution: String,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            amplitude: 0.0,
            step_theta: None,
            scope: NoiseScope::Off,
            distribution: "uniform".into(),
            seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn off() -> Self {
        Self::default()
    }

    pub fn is_active(&self) -> bool {
        self.scope != NoiseScope::Off && self.amplitude > 0.0
    }

    pub fn resolved_step(&self, pulse: &PulseSpec) -> f64 {
        self.step_theta
            .unwrap_or(pulse.width_theta / DEFAULT_NOISE_STEPS_PER_WIDTH)
    }

    pub fn validate(&self) -> Result<(), PulseError> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(PulseError::InvalidNoise(format!(
                "amplitude = {} must be >= 0",
                self.amplitude
            )));
        }
        if let Some(step) = self.step_theta {
            if !(step.is_finite() && step > 0.0) {
                return Err(PulseError::InvalidNoise(format!("step_theta = {step} must be > 0")));
            }
        }
        Ok(())
    }
}

/// Pre-sampled piecewise-constant δ(θ), in units of γ.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    pub step: f64,
    pub values: Vec<f64>,
}

impl NoisePath {
    pub fn zeros(step: f64, len: usize) -> Self {
        Self {
            step,
            values: vec![0.0; len],
        }
    }

    /// δ on the interval containing `probe`; constant beyond the last draw.
    pub fn value_at(&self, probe: f64) -> f64 {
        if self.values.is_empty() || probe < 0.0 {
            return 0.0;
        }
        let k = (probe / self.step).floor() as usize;
        self.values[k.min(self.values.len() - 1)]
    }
}

/// Draws ⌈θ_max/Δθ_n⌉ i.i.d. values with a generator seeded from `noise.seed`.
pub fn sample_noise_path(
    noise: &NoiseSpec,
    step: f64,
    theta_max: f64,
    distributions: &NoiseRegistry,
) -> Result<NoisePath, PulseError> {
    noise.validate()?;
    if !(theta_max > 0.0 && step > 0.0) {
        return Err(PulseError::InvalidNoise(format!(
            "need theta_max > 0 and step > 0 (got {theta_max}, {step})"
        )));
    }
    let len = (theta_max / step).ceil() as usize;
    let dist = distributions.get(&noise.distribution)?;
    if noise.amplitude == 0.0 {
        return Ok(NoisePath::zeros(step, len));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let values = (0..len).map(|_| dist.sample(&mut rng, noise.amplitude)).collect();
    Ok(NoisePath { step, values })
}

/// Envelope plus masked noise, the complete Γ(θ)/γ of one trajectory.
#[derive(Debug)]
pub struct RateProfile {
    envelope: Box<dyn PulseEnvelope>,
    noise: NoisePath,
    scope: NoiseScope,
    theta_max: f64,
}

impl RateProfile {
    pub fn new(pulse: &PulseSpec, noise: &NoiseSpec, theta_max: f64) -> Result<Self, PulseError> {
        Self::with_registries(
            pulse,
            noise,
            theta_max,
            &PulseRegistry::default(),
            &NoiseRegistry::default(),
        )
    }

    pub fn with_registries(
        pulse: &PulseSpec,
        noise: &NoiseSpec,
        theta_max: f64,
        shapes: &PulseRegistry,
        distributions: &NoiseRegistry,
    ) -> Result<Self, PulseError> {
        let envelope = shapes.build(pulse)?;
        let step = noise.resolved_step(pulse);
        // Zero-amplitude noise is treated as absent, so it adds no step points.
        let (path, scope) = if noise.is_active() {
            (sample_noise_path(noise, step, theta_max, distributions)?, noise.scope)
        } else {
            noise.validate()?;
            distributions.get(&noise.distribution)?;
            (NoisePath::zeros(step, 0), NoiseScope::Off)
        };
        Ok(Self {
            envelope,
            noise: path,
            scope,
            theta_max,
        })
    }

    pub fn envelope(&self) -> &dyn PulseEnvelope {
        self.envelope.as_ref()
    }

    pub fn noise_path(&self) -> &NoisePath {
        &self.noise
    }

    fn noise_active(&self, probe: f64) -> bool {
        match self.scope {
            NoiseScope::Off => false,
            NoiseScope::PulseOnly => (0.0..self.envelope.pulse_end()).contains(&probe),
            NoiseScope::FullEvolution => probe >= 0.0,
        }
    }

    /// max(0, envelope + δ·mask) on the piece containing `probe`.
    pub fn rate_on_piece(&self, theta: f64, probe: f64) -> f64 {
        let mut g = self.envelope.value_on_piece(theta, probe);
        if self.noise_active(probe) {
            g += self.noise.value_at(probe);
        }
        g.max(0.0)
    }

    /// Γ(θ)/γ.
    pub fn rate(&self, theta: f64) -> f64 {
        self.rate_on_piece(theta, theta)
    }

    /// Sorted discontinuities inside (0, θ_max).
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = self.envelope.breakpoints();
        let noise_end = match self.scope {
            NoiseScope::Off => 0.0,
            NoiseScope::PulseOnly => self.envelope.pulse_end().min(self.theta_max),
            NoiseScope::FullEvolution => self.theta_max,
        };
        if noise_end > 0.0 {
            pts.push(noise_end);
            let step = self.noise.step;
            let mut k = 1usize;
            while (k as f64) * step < noise_end * (1.0 - 1e-12) {
                pts.push(k as f64 * step);
                k += 1;
            }
        }
        pts.retain(|&t| t > 0.0 && t < self.theta_max);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// Γ(θ)/γ for a one-off evaluation; see [`RateProfile`] for repeated use.
pub fn gamma_at(pulse: &PulseSpec, noise: &NoiseSpec, theta: f64, path: &NoisePath) -> Result<f64, PulseError> {
    let envelope = PulseRegistry::default().build(pulse)?;
    let mut g = envelope.value(theta);
    let active = match noise.scope {
        NoiseScope::Off => false,
        NoiseScope::PulseOnly => (0.0..envelope.pulse_end()).contains(&theta),
        NoiseScope::FullEvolution => theta >= 0.0,
    };
    if active {
        g += path.value_at(theta);
    }
    Ok(g.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn noisy(amplitude: f64, scope: NoiseScope, seed: u64) -> NoiseSpec {
        NoiseSpec {
            amplitude,
            scope,
            seed,
            ..NoiseSpec::default()
        }
    }

    #[test]
    fn square_pulse_at_h_point() {
        let pulse = PulseSpec::square(9.0, 0.035);
        let off = NoiseSpec::off();
        let path = NoisePath::zeros(1.0, 0);
        assert_eq!(gamma_at(&pulse, &off, 0.1, &path).unwrap(), 9.0);
        assert_eq!(gamma_at(&pulse, &off, 0.3, &path).unwrap(), 0.0);
        assert_eq!(gamma_at(&pulse, &off, 0.0, &path).unwrap(), 9.0);
        assert_eq!(gamma_at(&pulse, &off, pulse.width_theta, &path).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_peak_is_gamma0() {
        let pulse = PulseSpec::gaussian(4.0, 0.05);
        let env = PulseRegistry::default().build(&pulse).unwrap();
        let center = 3.0 * pulse.width_theta;
        assert_eq!(env.value(center), 4.0);
        assert!(env.value(0.0) < 4.0 * 1.3e-4);
        assert_eq!(env.value(center + 6.01 * pulse.width_theta), 0.0);
    }

    #[test]
    fn pulse_only_noise_vanishes_after_the_pulse() {
        let pulse = PulseSpec::square(9.0, 0.035);
        let noise = noisy(3.0, NoiseScope::PulseOnly, 7);
        let profile = RateProfile::new(&pulse, &noise, 2.0 * TAU).unwrap();
        let sigma = pulse.width_theta;
        for k in 0..2000 {
            let theta = sigma + k as f64 * 0.006;
            assert_eq!(profile.rate(theta), 0.0);
        }
        // Inside the pulse the noise is visible.
        let inside: Vec<f64> = (0..20).map(|k| profile.rate((k as f64 + 0.5) * sigma / 20.0)).collect();
        assert!(inside.iter().any(|&g| g != 9.0));
    }

    #[test]
    fn full_evolution_noise_persists() {
        let pulse = PulseSpec::square(9.0, 0.035);
        let profile = RateProfile::new(&pulse, &noisy(3.0, NoiseScope::FullEvolution, 3), 2.0 * TAU).unwrap();
        let after: Vec<f64> = (0..200).map(|k| profile.rate(1.0 + k as f64 * 0.05)).collect();
        assert!(after.iter().any(|&g| g > 0.0));
        assert!(after.iter().all(|&g| g >= 0.0));
    }

    #[test]
    fn zero_amplitude_path_is_zero() {
        let path = sample_noise_path(
            &noisy(0.0, NoiseScope::FullEvolution, 1),
            0.01,
            1.0,
            &NoiseRegistry::default(),
        )
        .unwrap();
        assert_eq!(path.values.len(), 100);
        assert!(path.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn noise_path_is_deterministic() {
        let reg = NoiseRegistry::default();
        let spec = noisy(1.5, NoiseScope::FullEvolution, 42);
        let a = sample_noise_path(&spec, 0.01, 12.0, &reg).unwrap();
        let b = sample_noise_path(&spec, 0.01, 12.0, &reg).unwrap();
        assert_eq!(a, b);
        let c = sample_noise_path(&NoiseSpec { seed: 43, ..spec }, 0.01, 12.0, &reg).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_noise_mean_is_near_zero() {
        let reg = NoiseRegistry::default();
        let path = sample_noise_path(&noisy(1.0, NoiseScope::FullEvolution, 2024), 1.0, 1e5, &reg).unwrap();
        assert_eq!(path.values.len(), 100_000);
        let mean = path.values.iter().sum::<f64>() / path.values.len() as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!(path.values.iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn gaussian_noise_spread_matches_amplitude() {
        let reg = NoiseRegistry::default();
        let spec = NoiseSpec {
            distribution: "gaussian".into(),
            ..noisy(2.0, NoiseScope::FullEvolution, 5)
        };
        let path = sample_noise_path(&spec, 1.0, 1e5, &reg).unwrap();
        let n = path.values.len() as f64;
        let var = path.values.iter().map(|v| v * v).sum::<f64>() / n;
        assert!((var.sqrt() - 2.0).abs() < 0.03, "std {}", var.sqrt());
    }

    #[test]
    fn unknown_names_are_rejected() {
        let spec = PulseSpec {
            shape: "triangle".into(),
            ..PulseSpec::square(1.0, 0.1)
        };
        assert!(matches!(
            PulseRegistry::default().build(&spec),
            Err(PulseError::UnknownShape { .. })
        ));
        assert!(matches!(
            NoiseRegistry::default().get("pink"),
            Err(PulseError::UnknownDistribution { .. })
        ));
    }

    #[test]
    fn registry_accepts_custom_shapes() {
        #[derive(Debug)]
        struct Flat(f64);
        impl PulseEnvelope for Flat {
            fn name(&self) -> &'static str {
                "flat"
            }
            fn value_on_piece(&self, _: f64, _: f64) -> f64 {
                self.0
            }
            fn pulse_end(&self) -> f64 {
                f64::INFINITY
            }
            fn breakpoints(&self) -> Vec<f64> {
                Vec::new()
            }
        }
        let mut reg = PulseRegistry::default();
        reg.register("flat", |s| Ok(Box::new(Flat(s.gamma0))));
        let spec = PulseSpec {
            shape: "Flat".into(),
            ..PulseSpec::square(2.5, 0.1)
        };
        assert_eq!(reg.build(&spec).unwrap().value(100.0), 2.5);
        assert_eq!(reg.names(), vec!["flat", "gaussian", "square"]);
    }

    #[test]
    fn invalid_specs() {
        assert!(PulseSpec::square(-1.0, 0.1).validate().is_err());
        assert!(PulseSpec::square(1.0, 0.0).validate().is_err());
        assert!(noisy(-0.1, NoiseScope::PulseOnly, 0).validate().is_err());
    }

    #[test]
    fn square_integral_is_exact() {
        // The envelope is Γ₀ on [0, σ): a midpoint sum on a grid aligned to σ is exact.
        let pulse = PulseSpec::square(7.0, 0.04);
        let env = PulseRegistry::default().build(&pulse).unwrap();
        let n = 4000;
        let h = 2.0 * pulse.width_theta / n as f64;
        let integral: f64 = (0..n).map(|k| env.value((k as f64 + 0.5) * h) * h).sum();
        assert!((integral - 7.0 * pulse.width_theta).abs() < 1e-12);
    }

    #[test]
    fn gaussian_integral_matches_sqrt_pi() {
        // Composite Simpson over the whole truncated support.
        let pulse = PulseSpec {
            center_theta: Some(10.0),
            ..PulseSpec::gaussian(3.0, 0.05)
        };
        let env = PulseRegistry::default().build(&pulse).unwrap();
        let s = pulse.width_theta;
        let (a, b) = (10.0 - 6.0 * s, 10.0 + 6.0 * s);
        let n = 2000;
        let h = (b - a) / n as f64;
        let mut sum = env.value(a) + env.value(b);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * env.value(a + k as f64 * h);
        }
        let integral = sum * h / 3.0;
        assert!((integral - 3.0 * s * PI.sqrt()).abs() < 1e-6, "{integral}");
    }

    #[test]
    fn breakpoints_cover_noise_steps() {
        let pulse = PulseSpec::square(9.0, 0.035);
        let profile = RateProfile::new(&pulse, &noisy(1.0, NoiseScope::PulseOnly, 1), 4.0).unwrap();
        let bp = profile.breakpoints();
        // 19 interior noise steps plus the pulse edge.
        assert_eq!(bp.len(), 20);
        assert!((bp.last().unwrap() - pulse.width_theta).abs() < 1e-15);
        let off = RateProfile::new(&pulse, &NoiseSpec::off(), 4.0).unwrap();
        assert_eq!(off.breakpoints(), vec![pulse.width_theta]);
    }

    proptest! {
        #[test]
        fn rate_is_never_negative(
            amplitude in 0.0f64..10.0,
            gamma0 in 0.0f64..10.0,
            p in 0.005f64..0.2,
            seed in any::<u64>(),
            theta in 0.0f64..20.0,
            full in any::<bool>(),
            gaussian in any::<bool>(),
        ) {
            let pulse = if gaussian { PulseSpec::gaussian(gamma0, p) } else { PulseSpec::square(gamma0, p) };
            let scope = if full { NoiseScope::FullEvolution } else { NoiseScope::PulseOnly };
            let profile = RateProfile::new(&pulse, &noisy(amplitude, scope, seed), 20.0).unwrap();
            prop_assert!(profile.rate(theta) >= 0.0);
        }

        #[test]
        fn noise_path_is_piecewise_constant(seed in any::<u64>(), k in 0usize..100, frac in 0.0f64..1.0) {
            let step = 0.0125;
            let path = sample_noise_path(&noisy(1.0, NoiseScope::FullEvolution, seed), step, 2.0, &NoiseRegistry::default()).unwrap();
            let lo = path.value_at((k as f64 + 0.001) * step);
            let inside = path.value_at((k as f64 + 0.001 + 0.998 * frac) * step);
            prop_assert_eq!(lo, inside);
        }
    }
}
