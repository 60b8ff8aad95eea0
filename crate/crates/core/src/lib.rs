//! Entanglement dynamics of two capacitively coupled charge qubits.
//!
//! Four quantum dots (two double-dot charge qubits) are filled from source
//! leads by a gate-modulated tunneling rate. The crate builds the fermionic
//! model on the 16-state Fock space, integrates the Lindblad master equation
//! under square or Gaussian pulses with optional dephasing and amplitude
//! noise, and sweeps pulse parameters for maximal post-initialization
//! entanglement.
//!
//! Module map:
//! - [`algebra`]: dense complex matrices, Jacobi eigensolver, partial transpose.
//! - [`model`]: Jordan–Wigner operators, H₀, spectrum table, effective coupling Ω.
//! - [`pulses`]: named pulse envelopes and noise distributions behind registries.
//! - [`dynamics`]: collapse operators, Lindblad generator, RK4 evolution.
//! - [`metrics`]: fidelity, negativity, linear entropy, trajectory maxima.
//! - [`sweep`]: parallel grid sweeps and the H/M/P studies.

pub mod algebra;
pub mod dynamics;
pub mod metrics;
pub mod model;
pub mod pulses;
pub mod sweep;

pub use algebra::ComplexMatrix;
pub use dynamics::{evolve, DensityMatrix, SimConfig, Trajectory};
pub use model::ModelParams;
pub use pulses::{NoiseScope, NoiseSpec, PulseSpec};
pub use sweep::{run_sweep, Execution, SweepGrid, SweepResult};
