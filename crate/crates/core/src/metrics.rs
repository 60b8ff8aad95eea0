//! Entanglement and state-quality functionals.
//!
//! The bipartition is fixed: qubit A is dots 1–2, qubit B is dots 3–4, each a
//! 4-dimensional factor of the Fock space.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{
    hermitian_eig, hermitian_eigenvalues, partial_transpose_first, partial_transpose_second, AlgebraError,
    ComplexMatrix,
};
use crate::dynamics::{DensityMatrix, Trajectory};
use crate::model::{state_0110, state_1001, FOCK_DIM};

/// Dimension of each qubit's factor (two dots).
pub const QUBIT_FACTOR_DIM: usize = 4;

/// Round-off negatives down to this are clipped to zero in matrix square roots.
const ROUNDOFF_REL: f64 = 1e-14;

pub const POSITIVITY_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("empty window [{lo}, {hi}]: no samples")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// (|0110⟩ + e^{iφ}|1001⟩)/√2.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    pub phi: f64,
    vector: Vec<Complex64>,
}

impl TargetState {
    pub fn new(phi: f64) -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut vector = vec![Complex64::new(0.0, 0.0); FOCK_DIM];
        vector[state_0110().index()] = Complex64::new(r, 0.0);
        vector[state_1001().index()] = Complex64::from_polar(r, phi);
        Self { phi, vector }
    }

    pub fn vector(&self) -> &[Complex64] {
        &self.vector
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(ComplexMatrix::outer(&self.vector))
    }
}

impl Default for TargetState {
    /// φ = π/2.
    fn default() -> Self {
        Self::new(std::f64::consts::FRAC_PI_2)
    }
}

/// Fidelity against a pure target: √⟨φ|ρ|φ⟩, clipped at 0.
pub fn fidelity(rho: &DensityMatrix, target: &TargetState) -> f64 {
    let overlap = rho.as_matrix().sandwich(&target.vector, &target.vector).re;
    overlap.max(0.0).sqrt().min(1.0)
}

/// √A for a positive semidefinite Hermitian A.
pub fn sqrt_psd(a: &ComplexMatrix) -> Result<ComplexMatrix, MetricsError> {
    let spectrum = hermitian_eig(a, 1e-9)?;
    let min = spectrum.eigenvalues[0];
    if min < -POSITIVITY_TOL {
        return Err(MetricsError::NotPositive { min_eigenvalue: min });
    }
    let floor = roundoff_floor(&spectrum.eigenvalues);
    Ok(spectrum.map(|l| if l > floor { l.sqrt() } else { 0.0 }))
}

/// Eigenvalues at or below this are round-off on an exactly singular input;
/// their square roots (~1e-8) would otherwise dominate the error.
fn roundoff_floor(eigenvalues: &[f64]) -> f64 {
    let scale = eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    ROUNDOFF_REL * scale
}

/// Uhlmann fidelity Tr√(√ρ σ √ρ) for general density matrices.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, MetricsError> {
    let root = sqrt_psd(rho.as_matrix())?;
    // Validates σ as well.
    sqrt_psd(sigma.as_matrix())?;
    let inner = (&(&root * sigma.as_matrix()) * &root).hermitian_part();
    let vals = hermitian_eigenvalues(&inner, 1e-9)?;
    if vals[0] < -POSITIVITY_TOL {
        return Err(MetricsError::NotPositive {
            min_eigenvalue: vals[0],
        });
    }
    let floor = roundoff_floor(&vals);
    Ok(vals.iter().filter(|&&l| l > floor).map(|l| l.sqrt()).sum())
}

fn negative_mass(eigenvalues: &[f64]) -> f64 {
    // ½Σ(|λ| − λ) = Σ max(0, −λ)
    eigenvalues.iter().map(|&l| (-l).max(0.0)).sum()
}

/// Negativity ½Σ(|λₖ| − λₖ) over the eigenvalues of ρ^{T_A}.
pub fn negativity(rho: &DensityMatrix) -> f64 {
    let pt = partial_transpose_first(rho.as_matrix(), QUBIT_FACTOR_DIM, QUBIT_FACTOR_DIM)
        .expect("density matrices are 16-dimensional");
    let vals =
        hermitian_eigenvalues(&pt.hermitian_part(), f64::INFINITY).expect("Jacobi converges on 16x16 Hermitian input");
    negative_mass(&vals)
}

/// Same quantity through the transpose on qubit B.
pub fn negativity_second(rho: &DensityMatrix) -> f64 {
    let pt = partial_transpose_second(rho.as_matrix(), QUBIT_FACTOR_DIM, QUBIT_FACTOR_DIM)
        .expect("density matrices are 16-dimensional");
    let vals =
        hermitian_eigenvalues(&pt.hermitian_part(), f64::INFINITY).expect("Jacobi converges on 16x16 Hermitian input");
    negative_mass(&vals)
}

/// S = 1 − Tr ρ².
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    // Tr ρ² = Σ|ρᵢⱼ|² for Hermitian ρ.
    1.0 - rho.as_matrix().frobenius_norm().powi(2)
}

/// √[(1 + sin 2θ)/2], the closed two-level fidelity against φ = π/2.
pub fn analytic_fidelity(theta: f64) -> f64 {
    ((1.0 + (2.0 * theta).sin()) / 2.0).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub value: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaximaReport {
    pub pop_0110: Extremum,
    pub fidelity: Extremum,
    pub negativity: Extremum,
}

/// Maxima of the recorded metrics over samples with θ in [lo, hi].
/// Ties resolve to the earliest sample.
pub fn trajectory_maxima(traj: &Trajectory, lo: f64, hi: f64) -> Result<MaximaReport, MetricsError> {
    let mut it = traj.samples.iter().filter(|s| s.theta >= lo && s.theta <= hi);
    let first = it.next().ok_or(MetricsError::EmptyWindow { lo, hi })?;
    let init = |v: f64| Extremum {
        value: v,
        theta: first.theta,
    };
    let mut report = MaximaReport {
        pop_0110: init(first.pop_0110),
        fidelity: init(first.fidelity),
        negativity: init(first.negativity),
    };
    for s in it {
        for (slot, v) in [
            (&mut report.pop_0110, s.pop_0110),
            (&mut report.fidelity, s.fidelity),
            (&mut report.negativity, s.negativity),
        ] {
            if v > slot.value {
                *slot = Extremum {
                    value: v,
                    theta: s.theta,
                };
            }
        }
    }
    Ok(report)
}

/// Maxima over the whole trajectory.
pub fn full_maxima(traj: &Trajectory) -> Result<MaximaReport, MetricsError> {
    trajectory_maxima(traj, f64::NEG_INFINITY, f64::INFINITY)
}
