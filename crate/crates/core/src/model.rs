//! Four-dot charge-qubit model.
//!
//! Dots 1–2 form qubit A and dots 3–4 form qubit B. Fermionic operators are
//! represented on the 16-dimensional Fock space through a Jordan–Wigner
//! string of σz factors. In the computational basis a bit value of 0 marks an
//! occupied dot and 1 an empty one; the label `b1b2b3b4` maps to index
//! `Σ bᵢ·2^(4−i)`, so dot 1 is the most significant bit.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{self, hermitian_eig, kron_all, AlgebraError, ComplexMatrix};

pub const N_DOTS: usize = 4;
pub const FOCK_DIM: usize = 1 << N_DOTS;

/// ħ in μeV·ps.
pub const HBAR_UEV_PS: f64 = 658.2119;
/// ħ in μeV·ns.
pub const HBAR_UEV_NS: f64 = HBAR_UEV_PS * 1e-3;

/// Tolerance used when grouping eigenvalues into degenerate clusters (μeV).
const CLUSTER_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid basis label {0:?}: expected four characters from {{0,1}}")]
    InvalidLabel(String),
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("degenerate denominator: J = J' = {0} makes the effective coupling undefined")]
    DegenerateDenominator(f64),
    #[error("effective coupling mismatch: closed form {closed_form}, perturbative sum {perturbative}")]
    CouplingMismatch { closed_form: f64, perturbative: f64 },
    #[error("nonzero numerator {numerator} for resonant intermediate state |{state}>")]
    ResonantIntermediate { state: String, numerator: f64 },
    #[error("spectrum does not match the gamma = 0 table: {0}")]
    SpectrumMismatch(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Computational-basis state of the four dots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState(usize);

impl BasisState {
    pub fn from_index(index: usize) -> Self {
        assert!(index < FOCK_DIM, "basis index {index} out of range");
        Self(index)
    }

    /// Parses labels such as `"0110"`; `0` is an occupied dot, `1` an empty one.
    pub fn parse(label: &str) -> Result<Self, ModelError> {
        let bytes = label.as_bytes();
        if bytes.len() != N_DOTS {
            return Err(ModelError::InvalidLabel(label.to_string()));
        }
        let mut index = 0;
        for &b in bytes {
            index <<= 1;
            match b {
                b'0' => {}
                b'1' => index |= 1,
                _ => return Err(ModelError::InvalidLabel(label.to_string())),
            }
        }
        Ok(Self(index))
    }

    pub fn index(self) -> usize {
        self.0
    }

    /// `dot` is 1-based.
    pub fn is_occupied(self, dot: usize) -> bool {
        assert!((1..=N_DOTS).contains(&dot), "dot {dot} out of range");
        self.0 >> (N_DOTS - dot) & 1 == 0
    }

    pub fn occupation(self) -> usize {
        (1..=N_DOTS).filter(|&d| self.is_occupied(d)).count()
    }

    pub fn label(self) -> String {
        format!("{:04b}", self.0)
    }

    pub fn ket(self) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); FOCK_DIM];
        v[self.0] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn all() -> impl Iterator<Item = BasisState> {
        (0..FOCK_DIM).map(BasisState)
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}>", self.label())
    }
}

/// Shorthand for the two states spanning the entangling subspace.
pub fn state_0110() -> BasisState {
    BasisState::parse("0110").unwrap()
}

pub fn state_1001() -> BasisState {
    BasisState::parse("1001").unwrap()
}

/// Physical parameters in μeV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub eps: [f64; 4],
    pub gamma: f64,
    pub j: f64,
    pub jp: f64,
}

impl Default for ModelParams {
    /// J′ = 200 μeV, J = 2J′, γ = 0.05·J′.
    fn default() -> Self {
        Self::from_crossed_coupling(200.0, 0.05)
    }
}

impl ModelParams {
    /// Zero dot energies, J = 2J′ and γ = x·J′.
    pub fn from_crossed_coupling(jp: f64, x: f64) -> Self {
        Self {
            eps: [0.0; 4],
            gamma: x * jp,
            j: 2.0 * jp,
            jp,
        }
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }

    /// Checks the perturbative regime J > J′ ≥ 0 and γ ≥ 0.
    pub fn validate(&self) -> Result<(), ModelError> {
        let finite = self
            .eps
            .iter()
            .chain([&self.gamma, &self.j, &self.jp])
            .all(|v| v.is_finite());
        if !finite {
            return Err(ModelError::InvalidParams("non-finite parameter".into()));
        }
        if self.gamma < 0.0 {
            return Err(ModelError::InvalidParams(format!("gamma = {} < 0", self.gamma)));
        }
        if self.jp < 0.0 {
            return Err(ModelError::InvalidParams(format!("J' = {} < 0", self.jp)));
        }
        if self.j <= self.jp {
            return Err(ModelError::InvalidParams(format!(
                "J = {} must exceed J' = {}",
                self.j, self.jp
            )));
        }
        Ok(())
    }
}

/// Annihilation, creation and number operators for the four dots.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub d: [ComplexMatrix; 4],
    pub ddag: [ComplexMatrix; 4],
    pub n: [ComplexMatrix; 4],
}

impl OperatorSet {
    /// 1-based accessors.
    pub fn annihilator(&self, dot: usize) -> &ComplexMatrix {
        &self.d[dot - 1]
    }

    pub fn creator(&self, dot: usize) -> &ComplexMatrix {
        &self.ddag[dot - 1]
    }

    pub fn number(&self, dot: usize) -> &ComplexMatrix {
        &self.n[dot - 1]
    }

    pub fn total_number(&self) -> ComplexMatrix {
        self.n.iter().skip(1).fold(self.n[0].clone(), |acc, n| &acc + n)
    }
}

/// d_k = σz^{⊗(k−1)} ⊗ σ₋ ⊗ 𝕀^{⊗(4−k)}.
pub fn build_jw_operators() -> OperatorSet {
    let id = ComplexMatrix::identity(2);
    let sz = algebra::sigma_z();
    let sm = algebra::sigma_minus();
    let d: [ComplexMatrix; 4] = std::array::from_fn(|k| {
        let factors: Vec<&ComplexMatrix> = (0..N_DOTS)
            .map(|slot| match slot.cmp(&k) {
                std::cmp::Ordering::Less => &sz,
                std::cmp::Ordering::Equal => &sm,
                std::cmp::Ordering::Greater => &id,
            })
            .collect();
        kron_all(&factors)
    });
    let ddag = std::array::from_fn(|k| d[k].dagger());
    let n = std::array::from_fn(|k| &ddag[k] * &d[k]);
    OperatorSet { d, ddag, n }
}

/// Intra-qubit hopping v = γ(d₁†d₂ + d₃†d₄ + h.c.).
pub fn hopping(gamma: f64, ops: &OperatorSet) -> ComplexMatrix {
    let forward = &(ops.creator(1) * ops.annihilator(2)) + &(ops.creator(3) * ops.annihilator(4));
    (&forward + &forward.dagger()).scale_real(gamma)
}

/// Dot energies plus Coulomb terms: Σ εᵢnᵢ + J(n₁n₃ + n₂n₄) + J′(n₁n₄ + n₂n₃).
pub fn diagonal_part(p: &ModelParams, ops: &OperatorSet) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(FOCK_DIM);
    for (k, &e) in p.eps.iter().enumerate() {
        h = &h + &ops.n[k].scale_real(e);
    }
    let n = |dot: usize| ops.number(dot);
    let direct = &(n(1) * n(3)) + &(n(2) * n(4));
    let crossed = &(n(1) * n(4)) + &(n(2) * n(3));
    &(&h + &direct.scale_real(p.j)) + &crossed.scale_real(p.jp)
}

/// H₀ = h₀ + v + h_c in μeV.
pub fn build_hamiltonian(p: &ModelParams, ops: &OperatorSet) -> ComplexMatrix {
    &diagonal_part(p, ops) + &hopping(p.gamma, ops)
}

/// One eigenvalue cluster of a degenerate spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyCluster {
    pub energy: f64,
    pub multiplicity: usize,
    /// Basis labels carrying the cluster's eigenvectors.
    pub states: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyReport {
    pub clusters: Vec<EnergyCluster>,
}

impl DegeneracyReport {
    pub fn multiplicities(&self) -> Vec<(f64, usize)> {
        self.clusters.iter().map(|c| (c.energy, c.multiplicity)).collect()
    }
}

impl fmt::Display for DegeneracyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .clusters
            .iter()
            .map(|c| format!("{}:{}", c.energy, c.multiplicity))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Expected γ = 0 clusters {0:7, J′:2, J:2, J+J′:4, 2J+2J′:1}, merged where energies coincide.
pub fn bare_spectrum_clusters(j: f64, jp: f64) -> Vec<(f64, usize)> {
    let raw = [(0.0, 7), (jp, 2), (j, 2), (j + jp, 4), (2.0 * j + 2.0 * jp, 1)];
    let mut merged: Vec<(f64, usize)> = Vec::new();
    for (e, m) in raw {
        match merged.iter_mut().find(|(e2, _)| (e - *e2).abs() <= CLUSTER_TOL) {
            Some(slot) => slot.1 += m,
            None => merged.push((e, m)),
        }
    }
    merged.sort_by(|a, b| a.0.total_cmp(&b.0));
    merged
}

/// Groups a Hermitian spectrum into clusters of (near-)equal eigenvalues.
pub fn cluster_spectrum(h: &ComplexMatrix) -> Result<DegeneracyReport, ModelError> {
    let spectrum = hermitian_eig(h, 1e-12)?;
    let mut clusters: Vec<EnergyCluster> = Vec::new();
    for (k, &e) in spectrum.eigenvalues.iter().enumerate() {
        let v = spectrum.eigenvector(k);
        let dominant = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(i, _)| BasisState::from_index(i).label())
            .unwrap();
        match clusters.last_mut() {
            Some(c) if (e - c.energy).abs() <= CLUSTER_TOL * (1.0 + c.energy.abs()) => {
                c.multiplicity += 1;
                c.states.push(dominant);
            }
            _ => clusters.push(EnergyCluster {
                energy: e,
                multiplicity: 1,
                states: vec![dominant],
            }),
        }
    }
    for c in &mut clusters {
        c.states.sort();
    }
    Ok(DegeneracyReport { clusters })
}

/// Diagonalizes H₀ at γ = 0, ε = 0 and checks the cluster structure against
/// the closed-form degeneracy table.
pub fn verify_bare_spectrum(p: &ModelParams) -> Result<DegeneracyReport, ModelError> {
    if p.gamma != 0.0 || p.eps.iter().any(|&e| e != 0.0) {
        return Err(ModelError::InvalidParams(
            "table check requires gamma = 0 and zero dot energies".into(),
        ));
    }
    let ops = build_jw_operators();
    let report = cluster_spectrum(&build_hamiltonian(p, &ops))?;
    let expected = bare_spectrum_clusters(p.j, p.jp);
    if report.clusters.len() != expected.len() {
        return Err(ModelError::SpectrumMismatch(format!(
            "found {} clusters {report}, expected {}",
            report.clusters.len(),
            expected.len()
        )));
    }
    for (c, &(e, m)) in report.clusters.iter().zip(&expected) {
        if (c.energy - e).abs() > CLUSTER_TOL || c.multiplicity != m {
            return Err(ModelError::SpectrumMismatch(format!(
                "cluster {}:{} (states {:?}) vs expected {e}:{m}",
                c.energy, c.multiplicity, c.states
            )));
        }
    }
    Ok(report)
}

/// Ω = −2γ²/(J − J′).
pub fn effective_coupling_closed_form(p: &ModelParams) -> Result<f64, ModelError> {
    let gap = p.j - p.jp;
    if gap == 0.0 {
        return Err(ModelError::DegenerateDenominator(p.j));
    }
    Ok(-2.0 * p.gamma * p.gamma / gap)
}

/// Second-order sum Σᵢ ⟨0110|v|i⟩⟨i|v|1001⟩ / (ε − εᵢ) over basis states.
pub fn effective_coupling_perturbative(p: &ModelParams) -> Result<f64, ModelError> {
    if p.j == p.jp {
        return Err(ModelError::DegenerateDenominator(p.j));
    }
    let ops = build_jw_operators();
    let unperturbed = diagonal_part(p, &ops);
    let v = hopping(p.gamma, &ops);
    let (a, b) = (state_0110().index(), state_1001().index());
    let eps = unperturbed[(a, a)].re;
    let mut sum = 0.0;
    for i in BasisState::all() {
        let k = i.index();
        let numerator = (v[(a, k)] * v[(k, b)]).re;
        let denom = eps - unperturbed[(k, k)].re;
        if denom.abs() <= CLUSTER_TOL {
            if numerator != 0.0 {
                return Err(ModelError::ResonantIntermediate {
                    state: i.label(),
                    numerator,
                });
            }
            continue;
        }
        sum += numerator / denom;
    }
    Ok(sum)
}

/// Effective |0110⟩ ↔ |1001⟩ coupling Ω (μeV), cross-checked between the
/// closed form and the explicit second-order sum.
pub fn effective_coupling(p: &ModelParams) -> Result<f64, ModelError> {
    let closed_form = effective_coupling_closed_form(p)?;
    let perturbative = effective_coupling_perturbative(p)?;
    let scale = closed_form.abs().max(perturbative.abs());
    if (closed_form - perturbative).abs() > 1e-12 * scale {
        return Err(ModelError::CouplingMismatch {
            closed_form,
            perturbative,
        });
    }
    Ok(closed_form)
}

/// Timescales derived from the effective coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedScales {
    /// Ω in μeV (signed).
    pub omega: f64,
    /// Oscillation period T in ns.
    pub period: f64,
    /// First maximally entangled time τ = T/8 in ns.
    pub tau: f64,
    /// |Ω|/ħ in ns⁻¹; θ = theta_per_ns · t.
    pub theta_per_ns: f64,
}

impl DerivedScales {
    /// Converts a physical time (ns) to the dimensionless θ.
    pub fn theta_of_ns(&self, t_ns: f64) -> f64 {
        self.theta_per_ns * t_ns
    }

    pub fn ns_of_theta(&self, theta: f64) -> f64 {
        theta / self.theta_per_ns
    }

    /// Rate in GHz (ns⁻¹) expressed in units of |Ω|/ħ.
    pub fn dimensionless_rate_ghz(&self, rate_ghz: f64) -> f64 {
        rate_ghz / self.theta_per_ns
    }
}

pub fn derived_scales(p: &ModelParams) -> Result<DerivedScales, ModelError> {
    let omega = effective_coupling(p)?;
    let abs = omega.abs();
    let period = 2.0 * std::f64::consts::PI * HBAR_UEV_NS / abs;
    Ok(DerivedScales {
        omega,
        period,
        tau: period / 8.0,
        theta_per_ns: abs / HBAR_UEV_NS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn label(s: &str) -> usize {
        BasisState::parse(s).unwrap().index()
    }

    #[test]
    fn basis_labels() {
        assert_eq!(label("0000"), 0);
        assert_eq!(label("0110"), 6);
        assert_eq!(label("1001"), 9);
        assert_eq!(label("1111"), 15);
        assert_eq!(BasisState::from_index(6).label(), "0110");
        let s = BasisState::parse("0110").unwrap();
        assert!(s.is_occupied(1) && !s.is_occupied(2) && !s.is_occupied(3) && s.is_occupied(4));
        assert!(BasisState::parse("012").is_err());
        assert!(BasisState::parse("0120").is_err());
    }

    #[test]
    fn number_operators_follow_basis_convention() {
        let ops = build_jw_operators();
        for s in BasisState::all() {
            for dot in 1..=4 {
                let expected = if s.is_occupied(dot) { 1.0 } else { 0.0 };
                assert_eq!(ops.number(dot)[(s.index(), s.index())], c(expected));
            }
        }
        for n in &ops.n {
            let off: f64 = (0..16)
                .flat_map(|i| (0..16).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| n[(i, j)].norm())
                .sum();
            assert_eq!(off, 0.0);
        }
        // n₁|0110⟩ = |0110⟩
        let ket = BasisState::parse("0110").unwrap().ket();
        let n1 = ops.number(1);
        let out: Vec<Complex64> = (0..16).map(|i| (0..16).map(|k| n1[(i, k)] * ket[k]).sum()).collect();
        assert_eq!(out, ket);
    }

    #[test]
    fn annihilating_the_empty_state_gives_zero() {
        let ops = build_jw_operators();
        let empty = label("1111");
        for d in &ops.d {
            assert!((0..16).all(|i| d[(i, empty)].norm() == 0.0));
        }
    }

    #[test]
    fn anticommutation_relations() {
        let ops = build_jw_operators();
        let id = ComplexMatrix::identity(16);
        let zero = ComplexMatrix::zeros(16);
        for i in 0..4 {
            for j in 0..4 {
                let ac = ops.d[i].anticommutator(&ops.ddag[j]).unwrap();
                let expected = if i == j { &id } else { &zero };
                assert!(ac.approx_eq(expected, 1e-12), "{{d{}, d{}†}}", i + 1, j + 1);
                let aa = ops.d[i].anticommutator(&ops.d[j]).unwrap();
                assert!(aa.approx_eq(&zero, 1e-12));
            }
        }
    }

    #[test]
    fn hamiltonian_matrix_elements() {
        let ops = build_jw_operators();
        let p = ModelParams::default();
        let h = build_hamiltonian(&p, &ops);
        assert!(h.is_hermitian(1e-12));
        assert_eq!(h[(label("0110"), label("0110"))], c(p.jp));
        assert_eq!(h[(label("0000"), label("0000"))], c(2.0 * p.j + 2.0 * p.jp));
        assert_eq!(h[(label("0110"), label("1001"))], c(0.0));
        // Single hop dot 1 → dot 2; the σz string on dot 1 (now empty) gives −1.
        assert_eq!(h[(label("1010"), label("0110"))], c(-p.gamma));
    }

    #[test]
    fn hamiltonian_conserves_charge() {
        let ops = build_jw_operators();
        let h = build_hamiltonian(
            &ModelParams {
                eps: [1.0, -2.0, 3.0, 0.5],
                ..Default::default()
            },
            &ops,
        );
        let comm = h.commutator(&ops.total_number()).unwrap();
        assert!(comm.approx_eq(&ComplexMatrix::zeros(16), 1e-12));
    }

    #[test]
    fn bare_spectrum_at_default_couplings() {
        let p = ModelParams {
            gamma: 0.0,
            ..Default::default()
        };
        let report = verify_bare_spectrum(&p).unwrap();
        assert_eq!(
            report.multiplicities(),
            vec![(0.0, 7), (200.0, 2), (400.0, 2), (600.0, 4), (1200.0, 1)]
        );
        assert_eq!(report.clusters[1].states, vec!["0110", "1001"]);
        assert_eq!(report.clusters[2].states, vec!["0101", "1010"]);
        assert_eq!(report.clusters[4].states, vec!["0000"]);
        assert_eq!(
            report.clusters[0].states,
            vec!["0011", "0111", "1011", "1100", "1101", "1110", "1111"]
        );
    }

    #[test]
    fn bare_spectrum_merged_clusters() {
        let p = ModelParams {
            eps: [0.0; 4],
            gamma: 0.0,
            j: 1.0,
            jp: 0.0,
        };
        assert_eq!(
            verify_bare_spectrum(&p).unwrap().multiplicities(),
            vec![(0.0, 9), (1.0, 6), (2.0, 1)]
        );
        let p = ModelParams {
            eps: [0.0; 4],
            gamma: 0.0,
            j: 0.0,
            jp: 0.0,
        };
        assert_eq!(verify_bare_spectrum(&p).unwrap().multiplicities(), vec![(0.0, 16)]);
        let p = ModelParams {
            eps: [0.0; 4],
            gamma: 0.0,
            j: 300.0,
            jp: 100.0,
        };
        assert_eq!(
            verify_bare_spectrum(&p).unwrap().multiplicities(),
            vec![(0.0, 7), (100.0, 2), (300.0, 2), (400.0, 4), (800.0, 1)]
        );
    }

    #[test]
    fn bare_spectrum_multiplicities_stable_under_relabeling() {
        for (j, jp) in [(5.0, 3.0), (900.0, 1.0), (2.5, 2.25), (7.0, 0.5)] {
            let p = ModelParams {
                eps: [0.0; 4],
                gamma: 0.0,
                j,
                jp,
            };
            let m: Vec<usize> = verify_bare_spectrum(&p)
                .unwrap()
                .multiplicities()
                .iter()
                .map(|x| x.1)
                .collect();
            assert_eq!(m, vec![7, 2, 2, 4, 1], "J={j}, J'={jp}");
        }
    }

    #[test]
    fn bare_spectrum_rejects_hopping() {
        assert!(matches!(
            verify_bare_spectrum(&ModelParams::default()),
            Err(ModelError::InvalidParams(_))
        ));
    }

    #[test]
    fn effective_coupling_at_defaults() {
        let p = ModelParams::default();
        assert_eq!(p.gamma, 10.0);
        let omega = effective_coupling(&p).unwrap();
        assert!((omega + 1.0).abs() < 1e-12);
        assert_eq!(effective_coupling(&p.with_gamma(0.0)).unwrap(), 0.0);
        let err = effective_coupling(&ModelParams { j: 200.0, ..p }).unwrap_err();
        assert!(matches!(err, ModelError::DegenerateDenominator(_)));
    }

    #[test]
    fn perturbative_sum_has_two_intermediates() {
        // Only |1010⟩ and |0101⟩ connect |0110⟩ to |1001⟩ at second order.
        let p = ModelParams::default();
        let ops = build_jw_operators();
        let v = hopping(p.gamma, &ops);
        let (a, b) = (label("0110"), label("1001"));
        let contributing: Vec<String> = BasisState::all()
            .filter(|s| (v[(a, s.index())] * v[(s.index(), b)]).norm() > 0.0)
            .map(|s| s.label())
            .collect();
        assert_eq!(contributing, vec!["0101", "1010"]);
        for s in ["0101", "1010"] {
            let k = label(s);
            let term = (v[(a, k)] * v[(k, b)]).re / (p.jp - p.j);
            assert!((term - p.gamma * p.gamma / (p.jp - p.j)).abs() < 1e-15);
        }
    }

    #[test]
    fn derived_scales_at_defaults() {
        let s = derived_scales(&ModelParams::default()).unwrap();
        // T = 2πħ/|Ω| with ħ = 0.6582119 μeV·ns and |Ω| = 1 μeV.
        assert!((s.period - 4.135667).abs() < 1e-6, "{}", s.period);
        assert_eq!(s.tau, s.period / 8.0);
        assert!((s.tau - 0.516958).abs() < 1e-6);
        assert!((s.theta_per_ns - 1.0 / 0.6582119).abs() < 1e-12);
        assert!((s.theta_per_ns - 1.519267).abs() < 1e-6);

        let doubled = derived_scales(&ModelParams::default().with_gamma(20.0)).unwrap();
        assert!((doubled.period - s.period / 4.0).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(ModelParams::default().validate().is_ok());
        assert!(ModelParams {
            j: 100.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(ModelParams::default().with_gamma(-1.0).validate().is_err());
    }
}
