//! Pulse-parameter grid sweeps and the named operating-point studies.

use std::f64::consts::TAU;
use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{evolve, DynamicsError, SimConfig, Trajectory};
use crate::metrics::{trajectory_maxima, MetricsError};
use crate::pulses::{NoiseScope, NoiseSpec, PulseRegistry};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("unknown operating point {0:?} (expected H, M or P)")]
    UnknownPoint(String),
    #[error("failed to build worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// A labelled (Γ₀/γ, σ_θ/2π) operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NamedPoint {
    pub label: &'static str,
    pub gamma0_over_gamma: f64,
    pub p: f64,
}

/// High, medium and poor initialization quality.
pub fn named_points() -> [NamedPoint; 3] {
    [
        NamedPoint {
            label: "H",
            gamma0_over_gamma: 9.0,
            p: 0.035,
        },
        NamedPoint {
            label: "M",
            gamma0_over_gamma: 5.0,
            p: 0.065,
        },
        NamedPoint {
            label: "P",
            gamma0_over_gamma: 2.0,
            p: 0.09,
        },
    ]
}

pub fn named_point(label: &str) -> Result<NamedPoint, SweepError> {
    named_points()
        .into_iter()
        .find(|p| p.label.eq_ignore_ascii_case(label))
        .ok_or_else(|| SweepError::UnknownPoint(label.to_string()))
}

/// `base` with its pulse amplitude and width replaced by the given coordinates.
pub fn with_pulse_point(base: &SimConfig, gamma0_over_gamma: f64, p: f64) -> SimConfig {
    let mut cfg = base.clone();
    cfg.pulse.gamma0 = gamma0_over_gamma;
    cfg.pulse.width_theta = TAU * p;
    cfg
}

pub fn config_for_point(label: &str, base: &SimConfig) -> Result<SimConfig, SweepError> {
    let pt = named_point(label)?;
    Ok(with_pulse_point(base, pt.gamma0_over_gamma, pt.p))
}

/// `n` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for grid cell (i, j), a function of the coordinates only.
pub fn point_seed(base_seed: u64, i: usize, j: usize) -> u64 {
    splitmix64(splitmix64(base_seed ^ splitmix64(i as u64)) ^ (j as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub gamma0_over_gamma: Vec<f64>,
    /// σ_θ/2π values.
    pub p_values: Vec<f64>,
    pub base_config: SimConfig,
    pub pulse_shape: String,
    pub base_seed: u64,
    /// θ window for the maxima; the full trajectory when `None`.
    pub window: Option<(f64, f64)>,
    pub population_window: PopulationWindow,
}

/// Where max pop_0110 is taken. Fidelity and negativity always use `window`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopulationWindow {
    /// Samples at or after the end of the pulse, intersected with `window`.
    #[default]
    AfterPulse,
    Full,
}

impl SweepGrid {
    /// 20 × 20 grid over Γ₀/γ ∈ [1, 10], σ_θ/2π ∈ [0.01, 0.10].
    pub fn default_axes(base_config: SimConfig, pulse_shape: &str, base_seed: u64) -> Self {
        Self {
            gamma0_over_gamma: linspace(1.0, 10.0, 20),
            p_values: linspace(0.01, 0.10, 20),
            base_config,
            pulse_shape: pulse_shape.to_string(),
            base_seed,
            window: None,
            population_window: PopulationWindow::AfterPulse,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        for (name, axis) in [
            ("gamma0_over_gamma", &self.gamma0_over_gamma),
            ("p_values", &self.p_values),
        ] {
            if axis.is_empty() {
                return Err(SweepError::InvalidGrid(format!("{name} is empty")));
            }
            if axis
                .windows(2)
                .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
            {
                return Err(SweepError::InvalidGrid(format!("{name} must be strictly increasing")));
            }
        }
        if self.gamma0_over_gamma[0] < 0.0 || self.p_values[0] <= 0.0 {
            return Err(SweepError::InvalidGrid("amplitudes must be >= 0 and widths > 0".into()));
        }
        if !PulseRegistry::default().contains(&self.pulse_shape) {
            return Err(SweepError::InvalidGrid(format!(
                "unknown pulse shape {:?}",
                self.pulse_shape
            )));
        }
        self.base_config.validate()?;
        Ok(())
    }

    /// Full configuration of cell (i, j).
    pub fn cell_config(&self, i: usize, j: usize) -> SimConfig {
        let mut cfg = with_pulse_point(&self.base_config, self.gamma0_over_gamma[i], self.p_values[j]);
        cfg.pulse.shape = self.pulse_shape.clone();
        cfg.noise.seed = point_seed(self.base_seed, i, j);
        cfg.store_states = false;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "error", rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub i: usize,
    pub j: usize,
    pub gamma0_over_gamma: f64,
    pub p: f64,
    pub seed: u64,
    pub status: CellStatus,
    pub max_pop_0110: f64,
    pub max_fidelity: f64,
    pub max_negativity: f64,
    pub theta_at_max_neg: f64,
    /// Worst sampled |Tr ρ − 1|, Hermiticity drift and smallest eigenvalue.
    pub max_trace_error: f64,
    pub max_hermiticity_drift: f64,
    pub min_eigenvalue: f64,
}

impl SweepRecord {
    pub fn is_ok(&self) -> bool {
        self.status == CellStatus::Ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    pub shape: String,
    pub base_seed: u64,
    pub dtheta: f64,
    pub theta_max: f64,
}

pub const SWEEP_CSV_HEADER: &str =
    "gamma0_over_gamma,p,max_pop_0110,max_fidelity,max_negativity,max_negativity_2x,theta_at_max_neg,status";

impl SweepResult {
    /// Cell with the largest max_negativity among successful cells.
    pub fn argmax_negativity(&self) -> Option<&SweepRecord> {
        self.records
            .iter()
            .filter(|r| r.is_ok())
            .fold(None, |best: Option<&SweepRecord>, r| match best {
                Some(b) if b.max_negativity >= r.max_negativity => Some(b),
                _ => Some(r),
            })
    }

    pub fn global_max_negativity(&self) -> f64 {
        self.argmax_negativity().map_or(0.0, |r| r.max_negativity)
    }

    pub fn failed(&self) -> impl Iterator<Item = &SweepRecord> {
        self.records.iter().filter(|r| !r.is_ok())
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&SweepRecord> {
        self.records.iter().find(|r| r.i == i && r.j == j)
    }

    /// Failed cells keep their coordinates, leave the metric fields empty and carry status `failed`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{SWEEP_CSV_HEADER}")?;
        for r in &self.records {
            match r.status {
                CellStatus::Ok => writeln!(
                    w,
                    "{},{},{},{},{},{},{},ok",
                    r.gamma0_over_gamma,
                    r.p,
                    r.max_pop_0110,
                    r.max_fidelity,
                    r.max_negativity,
                    2.0 * r.max_negativity,
                    r.theta_at_max_neg
                )?,
                CellStatus::Failed(_) => writeln!(w, "{},{},,,,,,failed", r.gamma0_over_gamma, r.p)?,
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }
}

/// How grid cells are scheduled. Results do not depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    /// `None` uses the available parallelism.
    Parallel(Option<usize>),
    #[default]
    Auto,
}

impl fmt::Display for Execution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Execution::Serial => write!(f, "serial"),
            Execution::Parallel(Some(n)) => write!(f, "parallel({n})"),
            Execution::Parallel(None) | Execution::Auto => write!(f, "parallel"),
        }
    }
}

fn evaluate_cell(grid: &SweepGrid, i: usize, j: usize) -> SweepRecord {
    let cfg = grid.cell_config(i, j);
    let (lo, hi) = grid.window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let outcome = evolve(&cfg).map_err(SweepError::from).and_then(|t| {
        let mut m = trajectory_maxima(&t, lo, hi)?;
        if grid.population_window == PopulationWindow::AfterPulse {
            let end = PulseRegistry::default()
                .build(&cfg.pulse)
                .map_err(DynamicsError::from)?
                .pulse_end();
            m.pop_0110 = trajectory_maxima(&t, lo.max(end), hi)?.pop_0110;
        }
        Ok((m, t.max_trace_error(), t.max_hermiticity_drift(), t.min_eigenvalue()))
    });
    let mut record = SweepRecord {
        i,
        j,
        gamma0_over_gamma: grid.gamma0_over_gamma[i],
        p: grid.p_values[j],
        seed: cfg.noise.seed,
        status: CellStatus::Ok,
        max_pop_0110: f64::NAN,
        max_fidelity: f64::NAN,
        max_negativity: f64::NAN,
        theta_at_max_neg: f64::NAN,
        max_trace_error: f64::NAN,
        max_hermiticity_drift: f64::NAN,
        min_eigenvalue: f64::NAN,
    };
    match outcome {
        Ok((m, trace, herm, min_eig)) => {
            record.max_trace_error = trace;
            record.max_hermiticity_drift = herm;
            record.min_eigenvalue = min_eig;
            record.max_pop_0110 = m.pop_0110.value;
            record.max_fidelity = m.fidelity.value;
            record.max_negativity = m.negativity.value;
            record.theta_at_max_neg = m.negativity.theta;
        }
        Err(e) => {
            record.status = CellStatus::Failed(format!(
                "cell ({}, {}) at gamma0/gamma = {}, p = {}: {e}",
                i, j, record.gamma0_over_gamma, record.p
            ));
        }
    }
    record
}

/// Evaluates every grid cell. A failing cell is recorded, not propagated.
pub fn run_sweep(grid: &SweepGrid, execution: Execution) -> Result<SweepResult, SweepError> {
    grid.validate()?;
    let cells: Vec<(usize, usize)> = (0..grid.gamma0_over_gamma.len())
        .flat_map(|i| (0..grid.p_values.len()).map(move |j| (i, j)))
        .collect();
    let records = match execution {
        Execution::Serial => cells.iter().map(|&(i, j)| evaluate_cell(grid, i, j)).collect(),
        Execution::Auto | Execution::Parallel(None) => {
            cells.par_iter().map(|&(i, j)| evaluate_cell(grid, i, j)).collect()
        }
        Execution::Parallel(Some(workers)) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers.max(1))
                .build()
                .map_err(|e| SweepError::Pool(e.to_string()))?;
            pool.install(|| cells.par_iter().map(|&(i, j)| evaluate_cell(grid, i, j)).collect())
        }
    };
    Ok(SweepResult {
        records,
        shape: grid.pulse_shape.clone(),
        base_seed: grid.base_seed,
        dtheta: grid.base_config.dtheta,
        theta_max: grid.base_config.theta_max,
    })
}

/// Default dephasing rates (GHz).
pub const DEFAULT_DEPHASING_RATES_GHZ: [f64; 3] = [0.01, 0.1, 1.0];

/// Default noise amplitudes (units of γ): low, moderate, high.
pub const DEFAULT_NOISE_AMPLITUDES: [f64; 3] = [0.5, 1.5, 3.0];

/// One noise-free square-pulse trajectory per dephasing rate at a named point.
pub fn dephasing_study(label: &str, rates_ghz: &[f64], base: &SimConfig) -> Result<Vec<Trajectory>, SweepError> {
    let mut cfg = config_for_point(label, base)?;
    cfg.pulse.shape = "square".into();
    cfg.noise = NoiseSpec::off();
    rates_ghz
        .iter()
        .map(|&rate| {
            let run = SimConfig {
                dephasing_rate_ghz: rate,
                ..cfg.clone()
            };
            evolve(&run).map_err(SweepError::from)
        })
        .collect()
}

/// Seed for amplitude `k` of a noise study.
pub fn amplitude_seed(base_seed: u64, k: usize) -> u64 {
    point_seed(base_seed, k, usize::MAX)
}

/// One square-pulse trajectory per noise amplitude at a named point, with dephasing off.
pub fn noise_study(
    label: &str,
    amplitudes: &[f64],
    scope: NoiseScope,
    base: &SimConfig,
    base_seed: u64,
) -> Result<Vec<Trajectory>, SweepError> {
    let mut cfg = config_for_point(label, base)?;
    cfg.pulse.shape = "square".into();
    cfg.dephasing_rate_ghz = 0.0;
    amplitudes
        .iter()
        .enumerate()
        .map(|(k, &amplitude)| {
            let mut run = cfg.clone();
            run.noise = NoiseSpec {
                amplitude,
                scope,
                seed: amplitude_seed(base_seed, k),
                ..cfg.noise.clone()
            };
            evolve(&run).map_err(SweepError::from)
        })
        .collect()
}

/// Max negativity over the first period, θ ∈ [0, 2π].
pub fn first_cycle_max_negativity(traj: &Trajectory) -> Result<f64, SweepError> {
    Ok(trajectory_maxima(traj, 0.0, TAU)?.negativity.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::full_maxima;

    fn quick_base() -> SimConfig {
        SimConfig {
            theta_max: 1.0,
            dtheta: TAU * 2e-4,
            record_every: 20,
            ..SimConfig::default()
        }
    }

    #[test]
    fn named_points_table() {
        let pts = named_points();
        let coords: Vec<(&str, f64, f64)> = pts.iter().map(|p| (p.label, p.gamma0_over_gamma, p.p)).collect();
        assert_eq!(coords, vec![("H", 9.0, 0.035), ("M", 5.0, 0.065), ("P", 2.0, 0.09)]);
        assert_eq!(named_point("m").unwrap().p, 0.065);
        assert!(matches!(named_point("X"), Err(SweepError::UnknownPoint(_))));
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(1.0, 10.0, 20);
        assert_eq!(v.len(), 20);
        assert_eq!(v[0], 1.0);
        assert_eq!(v[19], 10.0);
        assert_eq!(linspace(0.5, 2.0, 1), vec![0.5]);
    }

    #[test]
    fn seeds_depend_on_coordinates_only() {
        assert_eq!(point_seed(7, 3, 4), point_seed(7, 3, 4));
        assert_ne!(point_seed(7, 3, 4), point_seed(7, 4, 3));
        assert_ne!(point_seed(7, 3, 4), point_seed(8, 3, 4));
    }

    #[test]
    fn single_cell_sweep_matches_direct_run() {
        let grid = SweepGrid {
            gamma0_over_gamma: vec![9.0],
            p_values: vec![0.035],
            ..SweepGrid::default_axes(quick_base(), "square", 1)
        };
        let result = run_sweep(&grid, Execution::Serial).unwrap();
        assert_eq!(result.records.len(), 1);
        let traj = evolve(&grid.cell_config(0, 0)).unwrap();
        let direct = full_maxima(&traj).unwrap();
        let after = trajectory_maxima(&traj, TAU * 0.035, f64::INFINITY).unwrap();
        let r = &result.records[0];
        assert_eq!(r.max_negativity, direct.negativity.value);
        assert_eq!(r.max_pop_0110, after.pop_0110.value);
        assert_eq!(r.max_fidelity, direct.fidelity.value);
        assert_eq!(r.theta_at_max_neg, direct.negativity.theta);
        assert_eq!(result.to_csv_string().lines().count(), 2);
    }

    #[test]
    fn full_population_window_matches_full_maxima() {
        let grid = SweepGrid {
            gamma0_over_gamma: vec![9.0],
            p_values: vec![0.035],
            population_window: PopulationWindow::Full,
            ..SweepGrid::default_axes(quick_base(), "square", 1)
        };
        let r = &run_sweep(&grid, Execution::Serial).unwrap().records[0];
        let direct = full_maxima(&evolve(&grid.cell_config(0, 0)).unwrap()).unwrap();
        assert_eq!(r.max_pop_0110, direct.pop_0110.value);
    }

    #[test]
    fn serial_and_parallel_agree() {
        let mut base = quick_base();
        base.noise = NoiseSpec {
            amplitude: 1.0,
            scope: NoiseScope::FullEvolution,
            ..NoiseSpec::off()
        };
        let grid = SweepGrid {
            gamma0_over_gamma: vec![2.0, 6.0],
            p_values: vec![0.03, 0.05, 0.08],
            ..SweepGrid::default_axes(base, "square", 99)
        };
        let serial = run_sweep(&grid, Execution::Serial).unwrap();
        let parallel = run_sweep(&grid, Execution::Parallel(Some(3))).unwrap();
        assert_eq!(serial, parallel);
        assert_eq!(serial.to_csv_string(), parallel.to_csv_string());
    }

    #[test]
    fn failed_cells_are_recorded() {
        let base = SimConfig {
            dtheta: 0.05,
            theta_max: 2.0,
            ..SimConfig::default()
        };
        let grid = SweepGrid {
            gamma0_over_gamma: vec![9.0],
            p_values: vec![0.035],
            ..SweepGrid::default_axes(base, "square", 0)
        };
        let result = run_sweep(&grid, Execution::Serial).unwrap();
        assert_eq!(result.failed().count(), 1);
        let csv = result.to_csv_string();
        assert!(csv.lines().nth(1).unwrap().ends_with(",,,,,,failed"), "{csv}");
        assert!(result.argmax_negativity().is_none());
    }

    #[test]
    fn grid_validation() {
        let good = SweepGrid::default_axes(quick_base(), "square", 0);
        assert!(good.validate().is_ok());
        let unsorted = SweepGrid {
            p_values: vec![0.05, 0.03],
            ..good.clone()
        };
        assert!(matches!(
            run_sweep(&unsorted, Execution::Serial),
            Err(SweepError::InvalidGrid(_))
        ));
        let empty = SweepGrid {
            gamma0_over_gamma: vec![],
            ..good.clone()
        };
        assert!(empty.validate().is_err());
        let shape = SweepGrid {
            pulse_shape: "sawtooth".into(),
            ..good
        };
        assert!(shape.validate().is_err());
    }

    #[test]
    fn zero_rate_dephasing_matches_plain_run() {
        let base = quick_base();
        let runs = dephasing_study("H", &[0.0], &base).unwrap();
        let plain = evolve(&config_for_point("H", &base).unwrap()).unwrap();
        assert_eq!(runs[0], plain);
    }

    #[test]
    fn zero_amplitude_noise_matches_plain_run() {
        let base = quick_base();
        let plain = evolve(&config_for_point("H", &base).unwrap()).unwrap();
        for scope in [NoiseScope::PulseOnly, NoiseScope::FullEvolution] {
            let runs = noise_study("H", &[0.0], scope, &base, 5).unwrap();
            assert_eq!(runs[0].samples, plain.samples);
        }
    }
}
