//! Dense complex linear algebra for small operator spaces.
//!
//! Everything here is sized for the 16-dimensional four-dot Fock space:
//! matrices are dense, row-major, and at most 64×64. The Hermitian
//! eigensolver is a cyclic complex Jacobi iteration, which is slow
//! asymptotically but very accurate and robust at these sizes.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 64;

/// Maximum number of Jacobi sweeps before giving up.
pub const MAX_JACOBI_SWEEPS: usize = 100;

/// Relative off-diagonal mass at which Jacobi is considered converged.
pub const JACOBI_REL_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (max |A - A^H| = {residual:e}, tol = {tol:e})")]
    NotHermitian { residual: f64, tol: f64 },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal mass {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },
}

/// Dense square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0 && dim <= MAX_DIM, "unsupported dimension {dim}");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries. Panics if the entry count is not a square.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Self {
        assert!(dim > 0 && dim <= MAX_DIM, "unsupported dimension {dim}");
        assert_eq!(data.len(), dim * dim, "expected {} entries", dim * dim);
        Self { dim, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "row {i} has wrong length");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(v, 0.0);
            }
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// Projector |v⟩⟨v| for a (not necessarily normalized) vector.
    pub fn outer(v: &[Complex64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    /// |k⟩⟨k| in the computational basis.
    pub fn basis_projector(dim: usize, k: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(k, k)] = ONE;
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Flat offset of entry (row, col).
    #[inline]
    pub fn offset(&self, row: usize, col: usize) -> usize {
        row * self.dim + col
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn diag(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn column(&self, col: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, col)]).collect()
    }

    pub fn dagger(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self[(j, i)];
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, AlgebraError> {
        check_same_dim(self, other, "matmul")?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// AB - BA.
    pub fn commutator(&self, other: &Self) -> Result<Self, AlgebraError> {
        Ok(&self.matmul(other)? - &other.matmul(self)?)
    }

    /// AB + BA.
    pub fn anticommutator(&self, other: &Self) -> Result<Self, AlgebraError> {
        Ok(&self.matmul(other)? + &other.matmul(self)?)
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff on different dimensions");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Elementwise equality within an absolute tolerance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    /// max |A - A^H|.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim;
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                r = r.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        r
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// (A + A^H) / 2.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        out
    }

    /// ⟨u|A|v⟩.
    pub fn sandwich(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let n = self.dim;
        assert!(u.len() == n && v.len() == n, "vector length mismatch");
        let mut acc = ZERO;
        for (row, ui) in self.data.chunks_exact(n).zip(u) {
            let ui = ui.conj();
            if ui == ZERO {
                continue;
            }
            let mut s = ZERO;
            for (a, b) in row.iter().zip(v) {
                s += a * b;
            }
            acc += ui * s;
        }
        acc
    }
}

fn check_same_dim(a: &ComplexMatrix, b: &ComplexMatrix, op: &str) -> Result<(), AlgebraError> {
    if a.dim != b.dim {
        return Err(AlgebraError::DimensionMismatch(format!("{op}: {} vs {}", a.dim, b.dim)));
    }
    Ok(())
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "add on different dimensions");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "sub on different dimensions");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Matrix product; panics on dimension mismatch. Use [`ComplexMatrix::matmul`] for a checked product.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product dimension mismatch")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product: `out[(i*db + k, j*db + l)] = a[i,j] * b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim, b.dim);
    let mut out = ComplexMatrix::zeros(da * db);
    for i in 0..da {
        for j in 0..da {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k, j * db + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a sequence of factors, left to right.
pub fn kron_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let (first, rest) = factors.split_first().expect("kron_all needs at least one factor");
    rest.iter().fold((*first).clone(), |acc, f| kron(&acc, f))
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_row_major(2, vec![ZERO, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), ZERO])
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_diag(&[1.0, -1.0])
}

/// σ₋ = (σx − iσy)/2.
pub fn sigma_minus() -> ComplexMatrix {
    (&sigma_x() - &sigma_y().scale(Complex64::i())).scale_real(0.5)
}

/// σ₊ = (σx + iσy)/2.
pub fn sigma_plus() -> ComplexMatrix {
    (&sigma_x() + &sigma_y().scale(Complex64::i())).scale_real(0.5)
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column k pairs with `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k)
    }

    /// V f(Λ) V^H.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = ZERO;
                for k in 0..n {
                    if fl[k] != 0.0 {
                        s += v[(i, k)] * v[(j, k)].conj() * fl[k];
                    }
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|l| l)
    }
}

fn off_diagonal_mass(a: &ComplexMatrix) -> f64 {
    let n = a.dim;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Fails with `NotHermitian` when `max |A - A^H| > tol`.
pub fn hermitian_eig(a: &ComplexMatrix, tol: f64) -> Result<Spectrum, AlgebraError> {
    let (m, v) = jacobi_diagonalize(a, tol, true)?;
    let v = v.expect("eigenvectors requested");
    let n = a.dim;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues = order.iter().map(|&k| m[(k, k)].re).collect();
    let mut vecs = ComplexMatrix::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vecs[(i, dst)] = v[(i, src)];
        }
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: vecs,
    })
}

/// Ascending eigenvalues of a Hermitian matrix, without accumulating eigenvectors.
pub fn hermitian_eigenvalues(a: &ComplexMatrix, tol: f64) -> Result<Vec<f64>, AlgebraError> {
    let (m, _) = jacobi_diagonalize(a, tol, false)?;
    let mut vals: Vec<f64> = (0..a.dim).map(|k| m[(k, k)].re).collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

fn jacobi_diagonalize(
    a: &ComplexMatrix,
    tol: f64,
    want_vectors: bool,
) -> Result<(ComplexMatrix, Option<ComplexMatrix>), AlgebraError> {
    let residual = a.hermiticity_residual();
    if residual > tol {
        return Err(AlgebraError::NotHermitian { residual, tol });
    }
    let n = a.dim;
    let mut m = a.hermitian_part();
    let mut v = want_vectors.then(|| ComplexMatrix::identity(n));
    let scale = m.frobenius_norm();
    let threshold = JACOBI_REL_TOL * scale;

    let mut converged = scale == 0.0 || off_diagonal_mass(&m) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_JACOBI_SWEEPS {
            return Err(AlgebraError::NoConvergence {
                sweeps,
                residual: off_diagonal_mass(&m),
            });
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                jacobi_rotate(&mut m, v.as_mut(), p, q);
            }
        }
        sweeps += 1;
        converged = off_diagonal_mass(&m) <= threshold;
    }
    Ok((m, v))
}

/// Annihilates the (p, q) entry with the unitary W = diag(1, e^{-iφ}) · R(c, s)
/// acting on rows/columns p and q: A ← W^H A W, V ← V W.
fn jacobi_rotate(m: &mut ComplexMatrix, v: Option<&mut ComplexMatrix>, p: usize, q: usize) {
    let apq = m[(p, q)];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let n = m.dim;
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // Skip rotations that would be lost in round-off of the diagonal.
    if b < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        m[(p, q)] = ZERO;
        m[(q, p)] = ZERO;
        return;
    }
    let phase = apq / b;
    let zeta = (aqq - app) / (2.0 * b);
    let t = if zeta.abs() > 1e150 {
        0.5 / zeta
    } else {
        zeta.signum() / (zeta.abs() + (zeta * zeta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // W block: [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
    let pc = phase.conj();
    let w_pp = Complex64::new(c, 0.0);
    let w_pq = Complex64::new(s, 0.0);
    let w_qp = pc * (-s);
    let w_qq = pc * c;

    // A ← A W
    for i in 0..n {
        let aip = m[(i, p)];
        let aiq = m[(i, q)];
        m[(i, p)] = aip * w_pp + aiq * w_qp;
        m[(i, q)] = aip * w_pq + aiq * w_qq;
    }
    // A ← W^H A
    for j in 0..n {
        let apj = m[(p, j)];
        let aqj = m[(q, j)];
        m[(p, j)] = w_pp.conj() * apj + w_qp.conj() * aqj;
        m[(q, j)] = w_pq.conj() * apj + w_qq.conj() * aqj;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);

    // V ← V W
    let Some(v) = v else { return };
    for i in 0..n {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * w_pp + viq * w_qp;
        v[(i, q)] = vip * w_pq + viq * w_qq;
    }
}

/// Composite index (a, b) ↦ a·dim_b + b of a bipartite basis.
#[inline]
pub fn composite_index(a: usize, b: usize, dim_b: usize) -> usize {
    a * dim_b + b
}

fn check_bipartite(rho: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<(), AlgebraError> {
    if dim_a == 0 || dim_b == 0 || dim_a * dim_b != rho.dim {
        return Err(AlgebraError::DimensionMismatch(format!(
            "partial transpose: {dim_a} x {dim_b} does not factor dimension {}",
            rho.dim
        )));
    }
    Ok(())
}

/// Partial transpose over the first factor:
/// `out[(a',b),(a,b')] = rho[(a,b),(a',b')]`.
pub fn partial_transpose_first(rho: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix, AlgebraError> {
    check_bipartite(rho, dim_a, dim_b)?;
    let mut out = ComplexMatrix::zeros(rho.dim);
    for a in 0..dim_a {
        for b in 0..dim_b {
            for a2 in 0..dim_a {
                for b2 in 0..dim_b {
                    out[(composite_index(a2, b, dim_b), composite_index(a, b2, dim_b))] =
                        rho[(composite_index(a, b, dim_b), composite_index(a2, b2, dim_b))];
                }
            }
        }
    }
    Ok(out)
}

/// Partial transpose over the second factor:
/// `out[(a,b'),(a',b)] = rho[(a,b),(a',b')]`.
pub fn partial_transpose_second(
    rho: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
) -> Result<ComplexMatrix, AlgebraError> {
    check_bipartite(rho, dim_a, dim_b)?;
    let mut out = ComplexMatrix::zeros(rho.dim);
    for a in 0..dim_a {
        for b in 0..dim_b {
            for a2 in 0..dim_a {
                for b2 in 0..dim_b {
                    out[(composite_index(a, b2, dim_b), composite_index(a2, b, dim_b))] =
                        rho[(composite_index(a, b, dim_b), composite_index(a2, b2, dim_b))];
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(dim: usize, entries: &[(f64, f64)]) -> ComplexMatrix {
        ComplexMatrix::from_row_major(dim, entries.iter().map(|&(r, i)| c(r, i)).collect())
    }

    fn random_hermitian(dim: usize, entries: &[(f64, f64)]) -> ComplexMatrix {
        random_matrix(dim, entries).hermitian_part()
    }

    fn entries(dim: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim)
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert!(kron(&i2, &i2).approx_eq(&ComplexMatrix::identity(4), 0.0));
        let zi = kron(&sigma_z(), &i2);
        assert!(zi.approx_eq(&ComplexMatrix::from_diag(&[1.0, 1.0, -1.0, -1.0]), 0.0));
    }

    #[test]
    fn kron_sigma_minus_sigma_z() {
        // σ₋ = [[0,0],[1,0]] so only block (1,0) survives: rows 2,3 / cols 0,1 = σz.
        let m = kron(&sigma_minus(), &sigma_z());
        let mut expected = ComplexMatrix::zeros(4);
        expected[(2, 0)] = c(1.0, 0.0);
        expected[(3, 1)] = c(-1.0, 0.0);
        assert!(m.approx_eq(&expected, 0.0));
    }

    #[test]
    fn dagger_basics() {
        let i = ComplexMatrix::identity(3);
        assert_eq!(i.dagger(), i);
        assert!(sigma_minus().dagger().approx_eq(&sigma_plus(), 0.0));
    }

    #[test]
    fn trace_and_products() {
        assert_eq!(ComplexMatrix::identity(16).trace(), c(16.0, 0.0));
        let n = sigma_plus().matmul(&sigma_minus()).unwrap();
        assert!(n.approx_eq(&ComplexMatrix::from_diag(&[1.0, 0.0]), 0.0));
        let err = ComplexMatrix::identity(2).matmul(&ComplexMatrix::identity(3));
        assert!(matches!(err, Err(AlgebraError::DimensionMismatch(_))));
    }

    #[test]
    fn eig_small_cases() {
        let s = hermitian_eig(&sigma_x(), 1e-12).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-14);

        let s = hermitian_eig(&ComplexMatrix::from_diag(&[3.0, 1.0, 2.0]), 1e-12).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 2.0, 3.0]);

        let s = hermitian_eig(&sigma_y(), 1e-12).unwrap();
        assert!(s.reconstruct().approx_eq(&sigma_y(), 1e-14));

        let zero = hermitian_eig(&ComplexMatrix::zeros(4), 1e-12).unwrap();
        assert_eq!(zero.eigenvalues, vec![0.0; 4]);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let err = hermitian_eig(&sigma_minus(), 1e-10).unwrap_err();
        assert!(matches!(err, AlgebraError::NotHermitian { .. }));
    }

    #[test]
    fn eig_degenerate_16() {
        // Heavily degenerate spectrum mixed by a dense unitary-like similarity.
        let h = kron_all(&[&sigma_x(), &sigma_x(), &sigma_z(), &sigma_y()]);
        let s = hermitian_eig(&h, 1e-12).unwrap();
        assert!(s.eigenvalues[..8].iter().all(|&l| (l + 1.0).abs() < 1e-12));
        assert!(s.eigenvalues[8..].iter().all(|&l| (l - 1.0).abs() < 1e-12));
        assert!(s.reconstruct().approx_eq(&h, 1e-12));
    }

    fn bell_01_10() -> ComplexMatrix {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::outer(&[c(0.0, 0.0), c(r, 0.0), c(r, 0.0), c(0.0, 0.0)])
    }

    #[test]
    fn partial_transpose_bell() {
        let pt = partial_transpose_first(&bell_01_10(), 2, 2).unwrap();
        let s = hermitian_eig(&pt, 1e-12).unwrap();
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (l, e) in s.eigenvalues.iter().zip(expected) {
            assert!((l - e).abs() < 1e-12, "{:?}", s.eigenvalues);
        }
    }

    #[test]
    fn partial_transpose_diagonal_unchanged() {
        let d = ComplexMatrix::from_diag(&[0.1, 0.2, 0.3, 0.4, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(partial_transpose_first(&d, 3, 3).unwrap(), d);
    }

    #[test]
    fn partial_transpose_dimension_mismatch() {
        let err = partial_transpose_first(&ComplexMatrix::identity(16), 4, 3).unwrap_err();
        assert!(matches!(err, AlgebraError::DimensionMismatch(_)));
    }

    #[test]
    fn partial_transpose_index_layout() {
        // Entry ((a,b),(a',b')) = ((1,2),(3,0)) must land at ((3,2),(1,0)).
        let mut rho = ComplexMatrix::zeros(16);
        rho[(composite_index(1, 2, 4), composite_index(3, 0, 4))] = c(0.25, -0.5);
        let pt = partial_transpose_first(&rho, 4, 4).unwrap();
        assert_eq!(pt[(composite_index(3, 2, 4), composite_index(1, 0, 4))], c(0.25, -0.5));
        assert_eq!(pt.as_slice().iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    proptest! {
        #[test]
        fn kron_is_associative(a in entries(2), b in entries(2), cc in entries(3)) {
            let (a, b, cc) = (random_matrix(2, &a), random_matrix(2, &b), random_matrix(3, &cc));
            let left = kron(&kron(&a, &b), &cc);
            let right = kron(&a, &kron(&b, &cc));
            prop_assert!(left.approx_eq(&right, 1e-12));
        }

        #[test]
        fn dagger_is_involution(a in entries(5)) {
            let a = random_matrix(5, &a);
            prop_assert_eq!(a.dagger().dagger(), a);
        }

        #[test]
        fn gram_trace_is_nonnegative_real(a in entries(4)) {
            let a = random_matrix(4, &a);
            let t = a.matmul(&a.dagger()).unwrap().trace();
            prop_assert!(t.im.abs() < 1e-12);
            prop_assert!(t.re >= 0.0);
            prop_assert!((t.re - a.frobenius_norm().powi(2)).abs() < 1e-12);
        }

        #[test]
        fn eig_reconstructs_and_is_unitary(a in entries(16)) {
            let h = random_hermitian(16, &a);
            let s = hermitian_eig(&h, 1e-12).unwrap();
            prop_assert!(s.reconstruct().max_abs_diff(&h) <= 1e-10);
            let v = &s.eigenvectors;
            let gram = v.dagger().matmul(v).unwrap();
            prop_assert!(gram.approx_eq(&ComplexMatrix::identity(16), 1e-10));
            prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let sum: f64 = s.eigenvalues.iter().sum();
            prop_assert!((sum - h.trace().re).abs() <= 1e-10);
        }

        #[test]
        fn partial_transpose_involution_and_trace(a in entries(16)) {
            let rho = random_hermitian(16, &a);
            let pt = partial_transpose_first(&rho, 4, 4).unwrap();
            prop_assert_eq!(partial_transpose_first(&pt, 4, 4).unwrap(), rho.clone());
            prop_assert_eq!(pt.trace(), rho.trace());
            prop_assert!(pt.is_hermitian(0.0));
            let pt2 = partial_transpose_second(&rho, 4, 4).unwrap();
            prop_assert_eq!(pt2.transpose(), pt);
        }

        #[test]
        fn product_states_have_positive_partial_transpose(a in entries(4), b in entries(4)) {
            // ρ = X X^H / Tr(X X^H) is a valid density matrix for any X.
            let density = |m: ComplexMatrix| {
                let g = m.matmul(&m.dagger()).unwrap();
                let t = g.trace().re;
                g.scale_real(1.0 / t)
            };
            let rho = kron(&density(random_matrix(4, &a)), &density(random_matrix(4, &b)));
            let pt = partial_transpose_first(&rho, 4, 4).unwrap();
            let s = hermitian_eig(&pt, 1e-12).unwrap();
            prop_assert!(s.eigenvalues[0] >= -1e-12);
        }
    }
}
