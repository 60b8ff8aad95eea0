//! Dimensionless Lindblad evolution of the four-dot density matrix.
//!
//! Time is θ = |Ω|t/ħ. The generator is
//!
//! ```text
//! dρ/dθ = −i[H₀/|Ω|, ρ]
//!         + (Γ(θ)/|Ω|) Σₙ (dₙ†ρdₙ − ½{dₙdₙ†, ρ})        injection, n ∈ {1, 4}
//!         + Σₘ (CₘρCₘ† − ½{Cₘ†Cₘ, ρ})                   dephasing, Cₘ = √Γ̃ Pₘ
//! ```
//!
//! with P₁ = |0110⟩⟨0110|, P₂ = |1001⟩⟨1001| and Γ̃ = Γ_dph·ħ/|Ω|.
//! Integration is fixed-step RK4 in the interaction picture of H₀, split at
//! every discontinuity of Γ(θ) so that each step sees a smooth rate.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{hermitian_eig, hermitian_eigenvalues, AlgebraError, ComplexMatrix};
use crate::metrics::{self, TargetState};
use crate::model::{
    self, build_hamiltonian, build_jw_operators, state_0110, state_1001, BasisState, ModelError, ModelParams,
    OperatorSet, FOCK_DIM, HBAR_UEV_NS,
};
use crate::pulses::{NoiseSpec, PulseError, PulseSpec, RateProfile};

/// Allowed |Tr ρ − 1| before a step is declared unstable.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
/// Allowed max|ρ − ρ†| produced by one step before symmetrization.
pub const HERMITICITY_DRIFT_LIMIT: f64 = 1e-10;
/// Smallest eigenvalue tolerated at sampled times.
pub const POSITIVITY_LIMIT: f64 = -1e-7;

/// Default θ step, 2π·10⁻⁴.
pub const DEFAULT_DTHETA: f64 = std::f64::consts::TAU * 1e-4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("integration unstable at theta = {theta}: trace drift {drift:e} exceeds {limit:e}; try a smaller dtheta")]
    StepUnstable { theta: f64, drift: f64, limit: f64 },
    #[error("hermiticity drift {drift:e} at theta = {theta}")]
    HermiticityDrift { theta: f64, drift: f64 },
    #[error("density matrix lost positivity at theta = {theta}: min eigenvalue {min_eigenvalue:e}")]
    NotPositive { theta: f64, min_eigenvalue: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A 16×16 density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates dimension, unit trace and Hermiticity within `tol`.
    pub fn from_matrix(m: ComplexMatrix, tol: f64) -> Result<Self, DynamicsError> {
        if m.dim() != FOCK_DIM {
            return Err(DynamicsError::Config(format!(
                "density matrix must be {FOCK_DIM}x{FOCK_DIM}"
            )));
        }
        let tr = m.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > tol {
            return Err(DynamicsError::Config(format!("trace {tr} is not 1")));
        }
        let h = m.hermiticity_residual();
        if h > tol {
            return Err(DynamicsError::Config(format!("not Hermitian (residual {h:e})")));
        }
        Ok(Self(m))
    }

    pub fn from_matrix_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    pub fn basis(state: BasisState) -> Self {
        Self(ComplexMatrix::basis_projector(FOCK_DIM, state.index()))
    }

    pub fn maximally_mixed() -> Self {
        Self(ComplexMatrix::identity(FOCK_DIM).scale_real(1.0 / FOCK_DIM as f64))
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn population(&self, state: BasisState) -> f64 {
        let k = state.index();
        self.0[(k, k)].re
    }

    pub fn trace_error(&self) -> f64 {
        (self.0.trace() - Complex64::new(1.0, 0.0)).norm()
    }

    pub fn min_eigenvalue(&self) -> Result<f64, AlgebraError> {
        Ok(hermitian_eigenvalues(&self.0.hermitian_part(), f64::INFINITY)?[0])
    }

    /// ⟨A⟩ = Tr(ρA).
    pub fn expectation(&self, a: &ComplexMatrix) -> Complex64 {
        (&self.0 * a).trace()
    }
}

/// One integration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    pub pulse: PulseSpec,
    pub noise: NoiseSpec,
    /// Γ_dph in GHz.
    pub dephasing_rate_ghz: f64,
    pub theta_max: f64,
    pub dtheta: f64,
    pub initial_state: String,
    pub record_every: usize,
    /// 1-based dots receiving electrons from source leads.
    pub injection_dots: Vec<usize>,
    /// Keep ρ at every sample.
    pub store_states: bool,
}

impl Default for SimConfig {
    /// H-point square pulse, no noise, no dephasing, two periods.
    fn default() -> Self {
        Self {
            params: ModelParams::default(),
            pulse: PulseSpec::square(9.0, 0.035),
            noise: NoiseSpec::off(),
            dephasing_rate_ghz: 0.0,
            theta_max: 2.0 * std::f64::consts::TAU,
            dtheta: DEFAULT_DTHETA,
            initial_state: "1111".into(),
            record_every: 10,
            injection_dots: vec![1, 4],
            store_states: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        self.params.validate()?;
        self.pulse.validate()?;
        self.noise.validate()?;
        let bad = |m: String| Err(DynamicsError::Config(m));
        if !(self.dtheta.is_finite() && self.dtheta > 0.0) {
            return bad(format!("dtheta = {} must be > 0", self.dtheta));
        }
        if !(self.theta_max.is_finite() && self.theta_max >= self.dtheta) {
            return bad(format!("theta_max = {} must be >= dtheta", self.theta_max));
        }
        if self.record_every == 0 {
            return bad("record_every must be >= 1".into());
        }
        if !(self.dephasing_rate_ghz.is_finite() && self.dephasing_rate_ghz >= 0.0) {
            return bad(format!("dephasing rate {} must be >= 0", self.dephasing_rate_ghz));
        }
        BasisState::parse(&self.initial_state)?;
        let mut dots = self.injection_dots.clone();
        dots.sort_unstable();
        dots.dedup();
        if dots.len() != self.injection_dots.len() || dots.iter().any(|d| !(1..=4).contains(d)) {
            return bad(format!(
                "injection dots {:?} must be distinct values in 1..=4",
                self.injection_dots
            ));
        }
        if self.params.gamma == 0.0 {
            return bad("gamma = 0 gives |Omega| = 0, so the dimensionless time is undefined".into());
        }
        Ok(())
    }
}

/// A named collapse operator.
#[derive(Debug, Clone)]
pub struct CollapseOperator {
    pub label: String,
    pub op: ComplexMatrix,
}

/// Injection channels (weighted by the time-dependent rate) and constant dephasing channels.
#[derive(Debug, Clone)]
pub struct CollapseSet {
    pub injection: Vec<CollapseOperator>,
    /// Already carry √Γ̃_dph.
    pub dephasing: Vec<CollapseOperator>,
    /// Γ̃_dph = Γ_dph·ħ/|Ω|.
    pub dephasing_rate: f64,
}

/// Γ_dph (GHz) in units of |Ω|/ħ.
pub fn dimensionless_dephasing(rate_ghz: f64, omega_abs_uev: f64) -> f64 {
    rate_ghz * HBAR_UEV_NS / omega_abs_uev
}

pub fn build_collapse_operators(ops: &OperatorSet, cfg: &SimConfig) -> Result<CollapseSet, DynamicsError> {
    let omega = model::effective_coupling(&cfg.params)?.abs();
    let injection = cfg
        .injection_dots
        .iter()
        .map(|&dot| CollapseOperator {
            label: format!("inject_d{dot}"),
            op: ops.creator(dot).clone(),
        })
        .collect();
    let rate = dimensionless_dephasing(cfg.dephasing_rate_ghz, omega);
    let dephasing = if rate > 0.0 {
        [("dephase_0110", state_0110()), ("dephase_1001", state_1001())]
            .into_iter()
            .map(|(label, s)| CollapseOperator {
                label: label.into(),
                op: ComplexMatrix::basis_projector(FOCK_DIM, s.index()).scale_real(rate.sqrt()),
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(CollapseSet {
        injection,
        dephasing,
        dephasing_rate: rate,
    })
}

/// Dense reference evaluation of dρ/dθ.
///
/// `h` is the dimensionless Hamiltonian H₀/|Ω| and `rate_at` returns the
/// dimensionless injection rate Γ(θ)/|Ω|.
pub fn lindblad_rhs(
    rho: &ComplexMatrix,
    theta: f64,
    h: &ComplexMatrix,
    collapse: &CollapseSet,
    rate_at: impl Fn(f64) -> f64,
) -> ComplexMatrix {
    let mut out = h.commutator(rho).expect("dimension").scale(Complex64::new(0.0, -1.0));
    let dissipator = |l: &ComplexMatrix| {
        let ld = l.dagger();
        let jump = &(l * rho) * &ld;
        let k = &ld * l;
        &jump - &k.anticommutator(rho).expect("dimension").scale_real(0.5)
    };
    let rate = rate_at(theta);
    for c in &collapse.injection {
        out = &out + &dissipator(&c.op).scale_real(rate);
    }
    for c in &collapse.dephasing {
        out = &out + &dissipator(&c.op);
    }
    out
}

/// Nonzero entries of an operator.
#[derive(Debug, Clone)]
struct SparseOp {
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOp {
    fn from_dense(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let entries = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter_map(|(i, j)| {
                let v = m[(i, j)];
                (v != ZERO).then_some((i, j, v))
            })
            .collect();
        Self { entries }
    }
}

/// Liouvillian specialized to sparse operators; allocation-free application.
#[derive(Debug, Clone)]
struct Liouvillian {
    n: usize,
    h: SparseOp,
    injection: Vec<SparseOp>,
    /// Σ L†L over injection channels.
    injection_k: SparseOp,
    dephasing: Vec<SparseOp>,
    dephasing_k: SparseOp,
}

impl Liouvillian {
    fn new(h: &ComplexMatrix, collapse: &CollapseSet) -> Self {
        let n = h.dim();
        let sum_k = |ops: &[CollapseOperator]| {
            ops.iter()
                .fold(ComplexMatrix::zeros(n), |acc, c| &acc + &(&c.op.dagger() * &c.op))
        };
        Self {
            n,
            h: SparseOp::from_dense(h),
            injection: collapse.injection.iter().map(|c| SparseOp::from_dense(&c.op)).collect(),
            injection_k: SparseOp::from_dense(&sum_k(&collapse.injection)),
            dephasing: collapse.dephasing.iter().map(|c| SparseOp::from_dense(&c.op)).collect(),
            dephasing_k: SparseOp::from_dense(&sum_k(&collapse.dephasing)),
        }
    }

    /// out += s·(A ρ)
    fn left(&self, a: &SparseOp, s: Complex64, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        for &(i, k, v) in &a.entries {
            let f = v * s;
            let src = &rho[k * n..(k + 1) * n];
            let dst = &mut out[i * n..(i + 1) * n];
            for (d, &r) in dst.iter_mut().zip(src) {
                *d += f * r;
            }
        }
    }

    /// out += s·(ρ A)
    fn right(&self, a: &SparseOp, s: Complex64, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        for &(k, j, v) in &a.entries {
            let f = v * s;
            for i in 0..n {
                out[i * n + j] += rho[i * n + k] * f;
            }
        }
    }

    /// out += s·(L ρ L†)
    fn sandwich(&self, l: &SparseOp, s: f64, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        for &(i, k, a) in &l.entries {
            let sa = a * s;
            for &(j, m, b) in &l.entries {
                out[i * n + j] += sa * b.conj() * rho[k * n + m];
            }
        }
    }

    fn apply(&self, rho: &[Complex64], rate: f64, out: &mut [Complex64]) {
        out.fill(ZERO);
        let minus_i = Complex64::new(0.0, -1.0);
        self.left(&self.h, minus_i, rho, out);
        self.right(&self.h, -minus_i, rho, out);
        if rate != 0.0 {
            for l in &self.injection {
                self.sandwich(l, rate, rho, out);
            }
            let half = Complex64::new(-0.5 * rate, 0.0);
            self.left(&self.injection_k, half, rho, out);
            self.right(&self.injection_k, half, rho, out);
        }
        if !self.dephasing.is_empty() {
            for c in &self.dephasing {
                self.sandwich(c, 1.0, rho, out);
            }
            let half = Complex64::new(-0.5, 0.0);
            self.left(&self.dephasing_k, half, rho, out);
            self.right(&self.dephasing_k, half, rho, out);
        }
    }
}

/// Metrics recorded at one sampled θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub theta: f64,
    /// Γ(θ)/γ.
    pub gamma: f64,
    pub fidelity: f64,
    pub negativity: f64,
    pub linear_entropy: f64,
    pub pop_0110: f64,
    pub trace_error: f64,
    /// Largest pre-symmetrization max|ρ − ρ†| since the previous sample.
    pub hermiticity_drift: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// ρ at each sample when `store_states` is set.
    pub states: Option<Vec<DensityMatrix>>,
    /// Number of RK4 steps taken.
    pub steps: usize,
}

pub const TRAJECTORY_CSV_HEADER: &str =
    "theta,theta_over_2pi,gamma_pulse,fidelity,negativity,linear_entropy,pop_0110,trace_error,negativity_2x";

impl Trajectory {
    pub fn thetas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.theta).collect()
    }

    pub fn column(&self, f: impl Fn(&Sample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    pub fn final_state(&self) -> Option<&DensityMatrix> {
        self.states.as_ref().and_then(|s| s.last())
    }

    pub fn max_trace_error(&self) -> f64 {
        self.samples.iter().map(|s| s.trace_error).fold(0.0, f64::max)
    }

    pub fn max_hermiticity_drift(&self) -> f64 {
        self.samples.iter().map(|s| s.hermiticity_drift).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }

    /// Shortest-round-trip decimal formatting, so identical runs give identical bytes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{TRAJECTORY_CSV_HEADER}")?;
        for s in &self.samples {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                s.theta,
                s.theta / std::f64::consts::TAU,
                s.gamma,
                s.fidelity,
                s.negativity,
                s.linear_entropy,
                s.pop_0110,
                s.trace_error,
                2.0 * s.negativity
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }
}

/// Time-stepping plan: segments between rate discontinuities, each cut into
/// equal steps no longer than `dtheta`.
fn segments(theta_max: f64, dtheta: f64, breakpoints: &[f64]) -> Vec<(f64, f64, usize)> {
    let mut edges = vec![0.0];
    edges.extend(breakpoints.iter().copied().filter(|&b| b > 0.0 && b < theta_max));
    edges.push(theta_max);
    edges
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let len = w[1] - w[0];
            let steps = ((len / dtheta) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            (w[0], w[1], steps)
        })
        .collect()
}

fn record(
    rho: &ComplexMatrix,
    theta: f64,
    gamma: f64,
    herm_drift: f64,
    target: &TargetState,
) -> Result<(Sample, DensityMatrix), DynamicsError> {
    let dm = DensityMatrix::from_matrix_unchecked(rho.clone());
    let min_eigenvalue = dm.min_eigenvalue()?;
    if min_eigenvalue < POSITIVITY_LIMIT {
        return Err(DynamicsError::NotPositive { theta, min_eigenvalue });
    }
    let sample = Sample {
        theta,
        gamma,
        fidelity: metrics::fidelity(&dm, target),
        negativity: metrics::negativity(&dm),
        linear_entropy: metrics::linear_entropy(&dm),
        pop_0110: dm.population(state_0110()),
        trace_error: dm.trace_error(),
        hermiticity_drift: herm_drift,
        min_eigenvalue,
    };
    Ok((sample, dm))
}

/// Collapse operators and H₀ expressed in the eigenbasis of H₀.
///
/// H₀ is block diagonal in the charge sectors of the two qubits, so the
/// eigenvector matrix keeps exact zeros outside those blocks and the rotated
/// collapse operators stay sparse.
struct EigenFrame {
    energies: Vec<f64>,
    vectors: ComplexMatrix,
    vectors_dagger: ComplexMatrix,
    dissipator: Liouvillian,
}

impl EigenFrame {
    fn new(h: &ComplexMatrix, collapse: &CollapseSet) -> Result<Self, DynamicsError> {
        let spectrum = hermitian_eig(h, 1e-12)?;
        let v = spectrum.eigenvectors;
        let vd = v.dagger();
        let rotate = |ops: &[CollapseOperator]| -> Vec<CollapseOperator> {
            ops.iter()
                .map(|c| CollapseOperator {
                    label: c.label.clone(),
                    op: &(&vd * &c.op) * &v,
                })
                .collect()
        };
        let rotated = CollapseSet {
            injection: rotate(&collapse.injection),
            dephasing: rotate(&collapse.dephasing),
            dephasing_rate: collapse.dephasing_rate,
        };
        let dissipator = Liouvillian::new(&ComplexMatrix::zeros(h.dim()), &rotated);
        Ok(Self {
            energies: spectrum.eigenvalues,
            vectors: v,
            vectors_dagger: vd,
            dissipator,
        })
    }

    fn to_eigen(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        &(&self.vectors_dagger * rho) * &self.vectors
    }

    fn to_lab(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        (&(&self.vectors * rho) * &self.vectors_dagger).hermitian_part()
    }

    /// e^{−i(E_j − E_k)θ} for a half step θ.
    fn half_step_phases(&self, half: f64) -> Vec<Complex64> {
        let e = &self.energies;
        e.iter()
            .flat_map(|&ej| e.iter().map(move |&ek| Complex64::from_polar(1.0, -(ej - ek) * half)))
            .collect()
    }
}

fn rotate_in_place(rho: &mut [Complex64], phases: &[Complex64]) {
    for (r, &p) in rho.iter_mut().zip(phases) {
        *r *= p;
    }
}

/// Integrates the master equation from θ = 0 to `theta_max`.
///
/// The state is held in the eigenbasis of H₀ and advanced with RK4 in the
/// interaction picture: the coherent part is applied as exact phases over
/// each half step and RK4 acts on the dissipators only. Without dissipation
/// the propagation is exact; with it the scheme is fourth order in dθ.
pub fn evolve(cfg: &SimConfig) -> Result<Trajectory, DynamicsError> {
    cfg.validate()?;
    let ops = build_jw_operators();
    let omega = model::effective_coupling(&cfg.params)?.abs();
    let h = build_hamiltonian(&cfg.params, &ops).scale_real(1.0 / omega);
    let collapse = build_collapse_operators(&ops, cfg)?;
    let profile = RateProfile::new(&cfg.pulse, &cfg.noise, cfg.theta_max)?;
    // Γ/γ → Γ/|Ω|
    let rate_scale = cfg.params.gamma / omega;
    let frame = EigenFrame::new(&h, &collapse)?;
    let liouvillian = &frame.dissipator;
    let has_dephasing = !collapse.dephasing.is_empty();
    let target = TargetState::default();

    let n = FOCK_DIM;
    let initial = ComplexMatrix::basis_projector(n, BasisState::parse(&cfg.initial_state)?.index());
    let mut rho = frame.to_eigen(&initial);
    let len = n * n;
    let mut k1 = vec![ZERO; len];
    let mut k2 = vec![ZERO; len];
    let mut k3 = vec![ZERO; len];
    let mut k4 = vec![ZERO; len];
    let mut mid = vec![ZERO; len];
    let mut tmp = vec![ZERO; len];

    let mut samples = Vec::new();
    let mut states = cfg.store_states.then(Vec::new);
    let mut push = |rho: &ComplexMatrix, theta: f64, drift: f64| -> Result<(), DynamicsError> {
        let (s, dm) = record(&frame.to_lab(rho), theta, profile.rate(theta), drift, &target)?;
        samples.push(s);
        if let Some(states) = states.as_mut() {
            states.push(dm);
        }
        Ok(())
    };
    push(&rho, 0.0, 0.0)?;

    let plan = segments(cfg.theta_max, cfg.dtheta, &profile.breakpoints());
    let mut step = 0usize;
    let mut drift_since_sample: f64 = 0.0;
    let mut theta = 0.0;
    for (lo, hi, nsteps) in plan {
        let probe = 0.5 * (lo + hi);
        let rate = |t: f64| profile.rate_on_piece(t, probe) * rate_scale;
        let dt = (hi - lo) / nsteps as f64;
        let phases = frame.half_step_phases(0.5 * dt);
        for s in 0..nsteps {
            let t0 = lo + s as f64 * dt;
            let t1 = if s + 1 == nsteps { hi } else { lo + (s + 1) as f64 * dt };
            let tm = t0 + 0.5 * dt;
            let (r0, rm, r1) = (rate(t0), rate(tm), rate(t1));

            // ρ_I = P ρ, the state carried to the step midpoint
            mid.copy_from_slice(rho.as_slice());
            rotate_in_place(&mut mid, &phases);
            if r0 == 0.0 && rm == 0.0 && r1 == 0.0 && !has_dephasing {
                rotate_in_place(&mut mid, &phases);
                rho.as_mut_slice().copy_from_slice(&mid);
            } else {
                liouvillian.apply(rho.as_slice(), r0, &mut k1);
                rotate_in_place(&mut k1, &phases);
                for ((t, &a), &b) in tmp.iter_mut().zip(&mid).zip(&k1) {
                    *t = a + b * (0.5 * dt);
                }
                liouvillian.apply(&tmp, rm, &mut k2);
                for ((t, &a), &b) in tmp.iter_mut().zip(&mid).zip(&k2) {
                    *t = a + b * (0.5 * dt);
                }
                liouvillian.apply(&tmp, rm, &mut k3);
                for ((t, &a), &b) in tmp.iter_mut().zip(&mid).zip(&k3) {
                    *t = a + b * dt;
                }
                rotate_in_place(&mut tmp, &phases);
                liouvillian.apply(&tmp, r1, &mut k4);
                let w = dt / 6.0;
                for (i, m) in mid.iter_mut().enumerate() {
                    *m += (k1[i] + (k2[i] + k3[i]) * 2.0) * w;
                }
                rotate_in_place(&mut mid, &phases);
                for ((r, &m), &k) in rho.as_mut_slice().iter_mut().zip(&mid).zip(&k4) {
                    *r = m + k * w;
                }
            }

            theta = t1;
            step += 1;
            let drift = rho.hermiticity_residual();
            if drift.is_nan() || drift > HERMITICITY_DRIFT_LIMIT {
                return Err(DynamicsError::HermiticityDrift { theta, drift });
            }
            drift_since_sample = drift_since_sample.max(drift);
            rho = rho.hermitian_part();
            let trace_drift = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
            if trace_drift.is_nan() || trace_drift > TRACE_DRIFT_LIMIT {
                return Err(DynamicsError::StepUnstable {
                    theta,
                    drift: trace_drift,
                    limit: TRACE_DRIFT_LIMIT,
                });
            }
            if step.is_multiple_of(cfg.record_every) {
                push(&rho, theta, drift_since_sample)?;
                drift_since_sample = 0.0;
            }
        }
    }
    if !step.is_multiple_of(cfg.record_every) {
        push(&rho, theta, drift_since_sample)?;
    }
    Ok(Trajectory {
        samples,
        states,
        steps: step,
    })
}
