//! Command bodies. Each run command turns a resolved [`Config`] into CSV
//! text, the seeds it used and a human-readable summary.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use anyhow::Context;
use chargeq_core::dynamics::{evolve, DensityMatrix, SimConfig, Trajectory, TRAJECTORY_CSV_HEADER};
use chargeq_core::metrics::{analytic_fidelity, full_maxima, negativity, trajectory_maxima, TargetState};
use chargeq_core::model::{
    derived_scales, effective_coupling, effective_coupling_closed_form, effective_coupling_perturbative, state_0110,
    verify_bare_spectrum, DegeneracyReport, ModelParams,
};
use chargeq_core::pulses::{NoiseScope, PulseSpec};
use chargeq_core::sweep::{amplitude_seed, dephasing_study, first_cycle_max_negativity, noise_study, run_sweep};
use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::manifest::SeedRecord;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Invalid(String),
    #[error("{0} oracle(s) failed")]
    OracleFailed(usize),
    #[error("{0:#}")]
    Runtime(anyhow::Error),
}

impl CliError {
    /// 1 for validation and oracle failures, 2 for runtime errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Invalid(_) | CliError::OracleFailed(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

/// Commands that write a run directory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunKind {
    Simulate,
    Sweep,
    DephasingStudy,
    NoiseStudy,
}

impl RunKind {
    pub fn name(self) -> &'static str {
        match self {
            RunKind::Simulate => "simulate",
            RunKind::Sweep => "sweep",
            RunKind::DephasingStudy => "dephasing-study",
            RunKind::NoiseStudy => "noise-study",
        }
    }

    /// Fills command-specific defaults and checks the configuration.
    pub fn prepare(self, cfg: &mut Config) -> Result<(), CliError> {
        if matches!(self, RunKind::DephasingStudy | RunKind::NoiseStudy) && cfg.point.is_none() {
            cfg.point = Some("H".into());
        }
        cfg.resolve_point()?;
        match self {
            RunKind::Simulate => cfg.validate()?,
            RunKind::Sweep => cfg.validate_sweep()?,
            RunKind::DephasingStudy => cfg.validate_studies(false)?,
            RunKind::NoiseStudy => cfg.validate_studies(true)?,
        }
        Ok(())
    }

    pub fn execute(self, cfg: &Config) -> Result<RunOutput, CliError> {
        match self {
            RunKind::Simulate => simulate(cfg),
            RunKind::Sweep => sweep(cfg),
            RunKind::DephasingStudy => dephasing(cfg),
            RunKind::NoiseStudy => noise(cfg),
        }
    }
}

impl fmt::Display for RunKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RunKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            RunKind::Simulate,
            RunKind::Sweep,
            RunKind::DephasingStudy,
            RunKind::NoiseStudy,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| CliError::Invalid(format!("manifest names unknown command {s:?}")))
    }
}

pub struct RunOutput {
    pub csv: String,
    pub seeds: Vec<SeedRecord>,
    pub summary: Vec<String>,
}

fn periods(theta: f64) -> f64 {
    theta / TAU
}

fn run_evolve(sim: &SimConfig, what: &str) -> Result<Trajectory, CliError> {
    Ok(evolve(sim).with_context(|| format!("integrating {what}"))?)
}

/// Trajectory rows with `prefix` prepended to every data line.
fn push_rows(out: &mut String, prefix: &str, traj: &Trajectory) {
    for line in traj.to_csv_string().lines().skip(1) {
        out.push_str(prefix);
        out.push(',');
        out.push_str(line);
        out.push('\n');
    }
}

fn simulate(cfg: &Config) -> Result<RunOutput, CliError> {
    let sim = cfg.sim_config();
    let traj = run_evolve(&sim, "the trajectory")?;
    let m = full_maxima(&traj).context("computing maxima")?;
    let entropy = traj.samples.last().map_or(f64::NAN, |s| s.linear_entropy);
    let summary = vec![
        format!(
            "pulse {} gamma0/gamma = {}, width = {} periods; dephasing {} GHz; noise {:?} A = {}",
            sim.pulse.shape,
            sim.pulse.gamma0,
            cfg.pulse.width_periods,
            sim.dephasing_rate_ghz,
            sim.noise.scope,
            sim.noise.amplitude
        ),
        format!(
            "max pop_0110   = {:.6} at theta/2pi = {:.4}",
            m.pop_0110.value,
            periods(m.pop_0110.theta)
        ),
        format!(
            "max fidelity   = {:.6} at theta/2pi = {:.4}",
            m.fidelity.value,
            periods(m.fidelity.theta)
        ),
        format!(
            "max negativity = {:.6} (2N = {:.6}) at theta/2pi = {:.4}",
            m.negativity.value,
            2.0 * m.negativity.value,
            periods(m.negativity.theta)
        ),
        format!("final linear entropy = {entropy:.6}"),
    ];
    Ok(RunOutput {
        csv: traj.to_csv_string(),
        seeds: vec![SeedRecord::new("noise", sim.noise.seed)],
        summary,
    })
}

fn sweep(cfg: &Config) -> Result<RunOutput, CliError> {
    let grid = cfg.sweep_grid();
    let result = run_sweep(&grid, cfg.execution()).context("running the sweep")?;
    let mut summary = vec![format!(
        "{} cells ({} x {}), shape {}, execution {}",
        result.records.len(),
        grid.gamma0_over_gamma.len(),
        grid.p_values.len(),
        grid.pulse_shape,
        cfg.execution()
    )];
    let failed: Vec<_> = result.failed().collect();
    if !failed.is_empty() {
        summary.push(format!("{} cell(s) failed and are marked in the CSV", failed.len()));
        for r in failed.iter().take(5) {
            if let chargeq_core::sweep::CellStatus::Failed(msg) = &r.status {
                summary.push(format!("  {msg}"));
            }
        }
    }
    match result.argmax_negativity() {
        Some(best) => summary.push(format!(
            "argmax negativity: gamma0/gamma = {}, width = {} periods, N = {:.6} (2N = {:.6}) at theta/2pi = {:.4}",
            best.gamma0_over_gamma,
            best.p,
            best.max_negativity,
            2.0 * best.max_negativity,
            periods(best.theta_at_max_neg)
        )),
        None => summary.push("no cell succeeded".into()),
    }
    Ok(RunOutput {
        csv: result.to_csv_string(),
        seeds: vec![SeedRecord::new("sweep.base_seed", grid.base_seed)],
        summary,
    })
}

fn study_label(cfg: &Config) -> &str {
    cfg.point.as_deref().unwrap_or("H")
}

fn dephasing(cfg: &Config) -> Result<RunOutput, CliError> {
    let label = study_label(cfg);
    let rates = &cfg.studies.dephasing_rates_ghz;
    let trajs = dephasing_study(label, rates, &cfg.sim_config()).context("running the dephasing study")?;
    let mut csv = format!("dephasing_ghz,{TRAJECTORY_CSV_HEADER}\n");
    let mut summary = vec![format!("point {label}, square pulse, no amplitude noise")];
    for (rate, traj) in rates.iter().zip(&trajs) {
        push_rows(&mut csv, &rate.to_string(), traj);
        let n = first_cycle_max_negativity(traj).context("first-cycle maxima")?;
        summary.push(format!(
            "rate {rate} GHz: first-cycle max N = {n:.6} (2N = {:.6})",
            2.0 * n
        ));
    }
    Ok(RunOutput {
        csv,
        seeds: Vec::new(),
        summary,
    })
}

fn noise_scope_name(scope: NoiseScope) -> &'static str {
    match scope {
        NoiseScope::Off => "off",
        NoiseScope::PulseOnly => "pulse_only",
        NoiseScope::FullEvolution => "full_evolution",
    }
}

fn noise(cfg: &Config) -> Result<RunOutput, CliError> {
    let label = study_label(cfg);
    let amps = &cfg.studies.noise_amplitudes_over_gamma;
    let base = cfg.sim_config();
    let base_seed = cfg.noise.seed;
    let mut csv = format!("scope,amplitude_over_gamma,seed,{TRAJECTORY_CSV_HEADER}\n");
    let mut summary = vec![format!(
        "point {label}, square pulse, dephasing off, {} noise, base seed {base_seed}",
        cfg.noise.distribution
    )];
    let seeds: Vec<SeedRecord> = (0..amps.len())
        .map(|k| SeedRecord::new(format!("amplitude[{k}]"), amplitude_seed(base_seed, k)))
        .collect();
    for &scope in &cfg.studies.noise_scopes {
        let name = noise_scope_name(scope);
        let trajs = noise_study(label, amps, scope, &base, base_seed)
            .with_context(|| format!("running the {name} noise study"))?;
        for (k, (amp, traj)) in amps.iter().zip(&trajs).enumerate() {
            push_rows(&mut csv, &format!("{name},{amp},{}", seeds[k].seed), traj);
            let m = full_maxima(traj).context("computing maxima")?;
            summary.push(format!(
                "{name} A = {amp}: max F = {:.6}, max N = {:.6} (2N = {:.6})",
                m.fidelity.value,
                m.negativity.value,
                2.0 * m.negativity.value
            ));
        }
    }
    let mut all = vec![SeedRecord::new("noise.seed", base_seed)];
    all.extend(seeds);
    Ok(RunOutput {
        csv,
        seeds: all,
        summary,
    })
}

/// One line of the oracle report.
pub struct OracleResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn cluster_string(report: &DegeneracyReport) -> String {
    let parts: Vec<String> = report
        .clusters
        .iter()
        .map(|c| format!("{}:{}", (c.energy * 1e6).round() / 1e6, c.multiplicity))
        .collect();
    format!("{{{}}}", parts.join(", "))
}

fn oracle_table(p: &ModelParams) -> OracleResult {
    let bare = ModelParams {
        gamma: 0.0,
        eps: [0.0; 4],
        ..*p
    };
    let (pass, detail) = match verify_bare_spectrum(&bare) {
        Ok(report) => (true, format!("gamma = 0 clusters {}", cluster_string(&report))),
        Err(e) => (false, format!("{e:?}: {e}")),
    };
    OracleResult {
        name: "spectrum degeneracies",
        pass,
        detail,
    }
}

fn oracle_omega(p: &ModelParams) -> OracleResult {
    let (pass, detail) = match effective_coupling(p) {
        Ok(omega) => {
            let closed = effective_coupling_closed_form(p).unwrap_or(f64::NAN);
            let pert = effective_coupling_perturbative(p).unwrap_or(f64::NAN);
            match derived_scales(p) {
                Ok(s) => (
                    true,
                    format!(
                        "Omega = {omega} ueV (closed form {closed}, second-order sum {pert}); T = {:.4} ns, tau = {:.4} ns",
                        s.period, s.tau
                    ),
                ),
                Err(e) => (false, format!("{e:?}: {e}")),
            }
        }
        Err(e) => (false, format!("{e:?}: {e}")),
    };
    OracleResult {
        name: "effective coupling",
        pass,
        detail,
    }
}

/// Closed-system evolution from |0110⟩ over the first quarter period, against √((1 + sin 2θ)/2).
fn oracle_fidelity(p: &ModelParams, dtheta: f64) -> OracleResult {
    const LIMIT: f64 = 0.02;
    const FIRST_MAX: f64 = 0.125;
    const FIRST_MAX_TOL: f64 = 0.005;
    let sim = SimConfig {
        params: *p,
        pulse: PulseSpec::square(0.0, 0.035),
        initial_state: "0110".into(),
        theta_max: TAU / 4.0,
        dtheta,
        record_every: 1,
        ..SimConfig::default()
    };
    let outcome = evolve(&sim).map_err(|e| format!("{e:?}: {e}")).and_then(|traj| {
        let worst = traj
            .samples
            .iter()
            .map(|s| (s.fidelity - analytic_fidelity(s.theta)).abs())
            .fold(0.0, f64::max);
        let first = trajectory_maxima(&traj, 0.0, TAU / 4.0)
            .map_err(|e| e.to_string())?
            .fidelity;
        Ok((worst, periods(first.theta), first.value))
    });
    let (pass, detail) = match outcome {
        Ok((worst, at, value)) => (
            worst <= LIMIT && (at - FIRST_MAX).abs() <= FIRST_MAX_TOL,
            format!(
                "max |F - F_analytic| = {worst:.4} over theta/2pi in [0, 0.25] (limit {LIMIT}); first max F = {value:.4} at theta/2pi = {at:.4} (expected {FIRST_MAX})"
            ),
        ),
        Err(msg) => (false, msg),
    };
    OracleResult {
        name: "closed-system fidelity",
        pass,
        detail,
    }
}

fn oracle_bell() -> OracleResult {
    let bell = negativity(&TargetState::new(PI / 2.0).density());
    let product = negativity(&DensityMatrix::basis(state_0110()));
    OracleResult {
        name: "Bell negativity",
        pass: (bell - 0.5).abs() <= 1e-9 && product.abs() <= 1e-12,
        detail: format!("N(Bell) = {bell} (expected 0.5), N(|0110>) = {product}"),
    }
}

pub fn check(cfg: &Config) -> Vec<OracleResult> {
    let p = cfg.model_params();
    vec![
        oracle_table(&p),
        oracle_omega(&p),
        oracle_fidelity(&p, cfg.sim_config().dtheta),
        oracle_bell(),
    ]
}
