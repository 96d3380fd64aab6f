//! Dense finite-dimensional operator algebra.
//!
//! Operators are complex square matrices tagged with the role they were
//! validated for. Composite spaces are ordered object ⊗ probe, so index
//! `i * dim(probe) + k` addresses object level `i` and probe level `k`.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::serial;
use crate::tolerance::Tolerances;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorRole {
    General,
    Hermitian,
    Unitary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
    role: OperatorRole,
}

/// Complex matrix product through four real products, which take the
/// blocked real kernel instead of the generic scalar loop.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matrix product shape mismatch");
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, Complex64::new)
}

/// Largest entry modulus.
pub fn max_modulus(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entry of `m - m†`, relative to the largest entry of `m`.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let scale = max_modulus(m);
    if scale == 0.0 {
        return 0.0;
    }
    max_modulus(&(m - m.adjoint())) / scale
}

/// Largest entry of `u u† - I`.
pub fn unitary_residual(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_modulus(&(matmul(u, &u.adjoint()) - CMatrix::identity(u.nrows(), u.ncols())))
}

impl Operator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::Shape(format!(
                "operator must be a non-empty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self {
            matrix,
            role: OperatorRole::General,
        })
    }

    /// Validates Hermiticity against `tol` (relative residual).
    pub fn hermitian(matrix: CMatrix, tol: f64) -> Result<Self> {
        let mut op = Self::new(matrix)?;
        let residual = hermitian_residual(&op.matrix);
        if residual > tol {
            return Err(Error::ContractViolation {
                what: "operator is not Hermitian".into(),
                residual,
            });
        }
        op.role = OperatorRole::Hermitian;
        Ok(op)
    }

    pub fn unitary(matrix: CMatrix, tol: f64) -> Result<Self> {
        let mut op = Self::new(matrix)?;
        let residual = unitary_residual(&op.matrix);
        if residual > tol {
            return Err(Error::ContractViolation {
                what: "operator is not unitary".into(),
                residual,
            });
        }
        op.role = OperatorRole::Unitary;
        Ok(op)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
            role: OperatorRole::Unitary,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(dim, dim),
            role: OperatorRole::Hermitian,
        }
    }

    pub fn pauli_x() -> Self {
        Self::from_trusted(
            CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            OperatorRole::Hermitian,
        )
    }

    pub fn pauli_y() -> Self {
        Self::from_trusted(
            CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
            OperatorRole::Hermitian,
        )
    }

    pub fn pauli_z() -> Self {
        Self::from_trusted(
            CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
            OperatorRole::Hermitian,
        )
    }

    /// CNOT with the first tensor factor as control.
    pub fn cnot() -> Self {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = ONE;
        m[(1, 1)] = ONE;
        m[(2, 3)] = ONE;
        m[(3, 2)] = ONE;
        Self::from_trusted(m, OperatorRole::Unitary)
    }

    pub(crate) fn from_trusted(matrix: CMatrix, role: OperatorRole) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix, role }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn role(&self) -> OperatorRole {
        self.role
    }

    pub fn is_hermitian_tagged(&self) -> bool {
        self.role == OperatorRole::Hermitian
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            role: self.role,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            matrix: &self.matrix * Complex64::new(factor, 0.0),
            role: if self.role == OperatorRole::Hermitian {
                OperatorRole::Hermitian
            } else {
                OperatorRole::General
            },
        }
    }

    fn check_same_dim(&self, other: &Self, what: &str) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!(
                "{what}: dimensions {} and {} differ",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other, "sum")?;
        Ok(self + other)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other, "difference")?;
        Ok(self - other)
    }
}

fn combined_role(a: OperatorRole, b: OperatorRole) -> OperatorRole {
    if a == OperatorRole::Hermitian && b == OperatorRole::Hermitian {
        OperatorRole::Hermitian
    } else {
        OperatorRole::General
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        Operator {
            matrix: &self.matrix + &rhs.matrix,
            role: combined_role(self.role, rhs.role),
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        Operator {
            matrix: &self.matrix - &rhs.matrix,
            role: combined_role(self.role, rhs.role),
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        let role = if self.role == OperatorRole::Unitary && rhs.role == OperatorRole::Unitary {
            OperatorRole::Unitary
        } else {
            OperatorRole::General
        };
        Operator {
            matrix: matmul(&self.matrix, &rhs.matrix),
            role,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(CVector),
    Density(CMatrix),
}

impl QuantumState {
    pub fn pure(vector: CVector, tol: f64) -> Result<Self> {
        if vector.is_empty() {
            return Err(Error::Shape("state vector is empty".into()));
        }
        let residual = (vector.norm() - 1.0).abs();
        if residual > tol {
            return Err(Error::ContractViolation {
                what: "pure state is not normalized".into(),
                residual,
            });
        }
        Ok(Self::Pure(vector))
    }

    /// Pure state from an unnormalized nonzero vector.
    pub fn normalized(vector: CVector) -> Result<Self> {
        let norm = vector.norm();
        if vector.is_empty() || norm == 0.0 {
            return Err(Error::Domain("cannot normalize a zero vector".into()));
        }
        Ok(Self::Pure(vector / Complex64::new(norm, 0.0)))
    }

    pub fn density(rho: CMatrix, tol: &Tolerances) -> Result<Self> {
        if !rho.is_square() || rho.nrows() == 0 {
            return Err(Error::Shape(format!(
                "density matrix must be square, got {}x{}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let residual = hermitian_residual(&rho);
        if residual > tol.hermitian {
            return Err(Error::ContractViolation {
                what: "density matrix is not Hermitian".into(),
                residual,
            });
        }
        let trace_residual = (rho.trace() - ONE).norm();
        if trace_residual > tol.norm {
            return Err(Error::ContractViolation {
                what: "density matrix trace differs from 1".into(),
                residual: trace_residual,
            });
        }
        let min = hermitian_eigenvalues(&rho).into_iter().fold(f64::INFINITY, f64::min);
        if min < -tol.psd {
            return Err(Error::ContractViolation {
                what: "density matrix has a negative eigenvalue".into(),
                residual: -min,
            });
        }
        Ok(Self::Density(rho))
    }

    /// Computational basis state |k⟩.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::Shape(format!(
                "basis index {k} out of range for dimension {dim}"
            )));
        }
        let mut v = CVector::zeros(dim);
        v[k] = ONE;
        Ok(Self::Pure(v))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Pure(v) => v.len(),
            Self::Density(rho) => rho.nrows(),
        }
    }

    pub fn density_matrix(&self) -> CMatrix {
        match self {
            Self::Pure(v) => v * v.adjoint(),
            Self::Density(rho) => rho.clone(),
        }
    }

    /// Product state `self ⊗ other`.
    pub fn product(&self, other: &Self, max_dim: usize) -> Result<Self> {
        let dim = composite_dim(self.dim(), other.dim(), max_dim)?;
        let state = match (self, other) {
            (Self::Pure(a), Self::Pure(b)) => Self::Pure(a.kronecker(b)),
            _ => Self::Density(self.density_matrix().kronecker(&other.density_matrix())),
        };
        debug_assert_eq!(state.dim(), dim);
        Ok(state)
    }
}

fn composite_dim(a: usize, b: usize, max_dim: usize) -> Result<usize> {
    match a.checked_mul(b) {
        Some(dim) if dim <= max_dim => Ok(dim),
        Some(dim) => Err(Error::ModelTooLarge { dim, max: max_dim }),
        None => Err(Error::ModelTooLarge {
            dim: usize::MAX,
            max: max_dim,
        }),
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &Operator, b: &Operator, max_dim: usize) -> Result<Operator> {
    composite_dim(a.dim(), b.dim(), max_dim)?;
    let role = match (a.role, b.role) {
        (OperatorRole::Hermitian, OperatorRole::Hermitian) => OperatorRole::Hermitian,
        (OperatorRole::Unitary, OperatorRole::Unitary) => OperatorRole::Unitary,
        // A Hermitian factor tensored with the identity stays Hermitian.
        (OperatorRole::Hermitian, OperatorRole::Unitary) if is_identity(&b.matrix) => OperatorRole::Hermitian,
        (OperatorRole::Unitary, OperatorRole::Hermitian) if is_identity(&a.matrix) => OperatorRole::Hermitian,
        _ => OperatorRole::General,
    };
    Ok(Operator::from_trusted(a.matrix.kronecker(&b.matrix), role))
}

fn is_identity(m: &CMatrix) -> bool {
    *m == CMatrix::identity(m.nrows(), m.ncols())
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.check_same_dim(b, "commutator")?;
    let m = matmul(&a.matrix, &b.matrix) - matmul(&b.matrix, &a.matrix);
    Ok(Operator::from_trusted(m, OperatorRole::General))
}

/// Symmetrized product `(ab + ba) / 2`.
pub fn sym_product(a: &Operator, b: &Operator) -> Result<Operator> {
    a.check_same_dim(b, "symmetrized product")?;
    let m = (matmul(&a.matrix, &b.matrix) + matmul(&b.matrix, &a.matrix)) * Complex64::new(0.5, 0.0);
    Ok(Operator::from_trusted(m, combined_role(a.role, b.role)))
}

fn check_state_dim(op: &Operator, state: &QuantumState) -> Result<()> {
    if op.dim() != state.dim() {
        return Err(Error::Shape(format!(
            "operator dimension {} does not match state dimension {}",
            op.dim(),
            state.dim()
        )));
    }
    Ok(())
}

/// `⟨v|op|v⟩` for pure states, `tr(ρ op)` for density matrices.
pub fn expectation(op: &Operator, state: &QuantumState) -> Result<Complex64> {
    check_state_dim(op, state)?;
    Ok(match state {
        QuantumState::Pure(v) => v.dotc(&(&op.matrix * v)),
        QuantumState::Density(rho) => {
            // tr(ρ A) = Σ_ij ρ_ij A_ji
            let mut acc = ZERO;
            for i in 0..rho.nrows() {
                for j in 0..rho.ncols() {
                    acc += rho[(i, j)] * op.matrix[(j, i)];
                }
            }
            acc
        }
    })
}

/// Real expectation of a Hermitian operator. The imaginary rounding residual
/// must stay below `tol` relative to the operator's scale.
pub fn real_expectation(op: &Operator, state: &QuantumState, tol: f64) -> Result<f64> {
    let value = expectation(op, state)?;
    let scale = max_modulus(&op.matrix).max(1.0);
    if value.im.abs() > tol * scale {
        return Err(Error::NumericalContamination {
            what: "expectation of a Hermitian operator has an imaginary part".into(),
            residual: value.im.abs(),
        });
    }
    Ok(value.re)
}

/// `op - ⟨op⟩ I`.
pub fn centered(op: &Operator, state: &QuantumState) -> Result<Operator> {
    let mean = expectation(op, state)?;
    let mut m = op.matrix.clone();
    for i in 0..m.nrows() {
        m[(i, i)] -= mean;
    }
    let role = if op.role == OperatorRole::Hermitian {
        OperatorRole::Hermitian
    } else {
        OperatorRole::General
    };
    Ok(Operator::from_trusted(m, role))
}

/// Heisenberg-picture evolution `u† op u`.
pub fn heisenberg_out(u: &Operator, op: &Operator, tol: &Tolerances) -> Result<Operator> {
    u.check_same_dim(op, "heisenberg evolution")?;
    let residual = unitary_residual(&u.matrix);
    if residual > tol.unitary {
        return Err(Error::ContractViolation {
            what: "interaction is not unitary".into(),
            residual,
        });
    }
    let mut out = matmul(&matmul(&u.matrix.adjoint(), &op.matrix), &u.matrix);
    if op.role == OperatorRole::Hermitian {
        out = (&out + out.adjoint()) * Complex64::new(0.5, 0.0);
    }
    Ok(Operator::from_trusted(out, op.role))
}

/// Eigenvalues of a Hermitian matrix in ascending order. The input is
/// symmetrized before the solve.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut values: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Positive-semidefiniteness certificate for a Hermitian matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdVerdict {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    pub eigenvalues: Vec<f64>,
    /// Real part of the determinant.
    pub determinant: f64,
    /// Magnitude of the imaginary part left over by the determinant.
    pub determinant_imag_residual: f64,
    pub tolerance_used: f64,
    /// Largest absolute eigenvalue, or 1 for the zero matrix.
    pub scale: f64,
    /// Unit eigenvector of the minimum eigenvalue when the verdict is negative.
    #[serde(with = "serial::opt_complex_vector")]
    pub refuting_vector: Option<CVector>,
}

impl PsdVerdict {
    /// `min_eigenvalue / scale`; negative values below `-tolerance_used` refute.
    pub fn relative_margin(&self) -> f64 {
        self.min_eigenvalue / self.scale
    }
}

/// Eigenvalue-based PSD verdict. The Hermitian precondition is checked with
/// `tol.hermitian`, positivity with `tol.psd` relative to the spectral scale.
pub fn psd_check_with(m: &CMatrix, tol: &Tolerances) -> Result<PsdVerdict> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::Shape(format!(
            "psd check needs a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let residual = hermitian_residual(m);
    if residual > tol.hermitian {
        return Err(Error::ContractViolation {
            what: "psd check input is not Hermitian".into(),
            residual,
        });
    }
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let min_eigenvalue = eigenvalues[0];
    let largest = eigenvalues.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let scale = if largest == 0.0 { 1.0 } else { largest };
    let is_psd = min_eigenvalue >= -tol.psd * scale;
    let refuting_vector = (!is_psd).then(|| eig.eigenvectors.column(order[0]).into_owned());
    let det = m.clone().determinant();
    Ok(PsdVerdict {
        is_psd,
        min_eigenvalue,
        eigenvalues,
        determinant: det.re,
        determinant_imag_residual: det.im.abs(),
        tolerance_used: tol.psd,
        scale,
        refuting_vector,
    })
}

pub fn psd_check(m: &CMatrix, tol: f64) -> Result<PsdVerdict> {
    psd_check_with(m, &Tolerances::default().with_psd(tol))
}

/// Object observable lifted to the composite space: `a ⊗ I`.
pub fn embed_object(a: &Operator, probe_dim: usize, max_dim: usize) -> Result<Operator> {
    tensor(a, &Operator::identity(probe_dim), max_dim)
}

/// Probe observable lifted to the composite space: `I ⊗ m`.
pub fn embed_probe(m: &Operator, object_dim: usize, max_dim: usize) -> Result<Operator> {
    tensor(&Operator::identity(object_dim), m, max_dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{complex_gaussian_matrix, haar_unitary, random_density, random_hermitian, trial_rng};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn op(m: CMatrix) -> Operator {
        Operator::new(m).unwrap()
    }

    fn kron_oracle(a: &CMatrix, b: &CMatrix) -> CMatrix {
        let (p, q) = (a.nrows(), b.nrows());
        let mut out = CMatrix::zeros(p * q, p * q);
        for i in 0..p {
            for j in 0..p {
                for k in 0..q {
                    for l in 0..q {
                        out[(i * q + k, j * q + l)] = a[(i, j)] * b[(k, l)];
                    }
                }
            }
        }
        out
    }

    fn commutator_oracle(a: &CMatrix, b: &CMatrix) -> CMatrix {
        let n = a.nrows();
        CMatrix::from_fn(n, n, |i, j| {
            let mut acc = ZERO;
            for k in 0..n {
                acc += a[(i, k)] * b[(k, j)] - b[(i, k)] * a[(k, j)];
            }
            acc
        })
    }

    #[test]
    fn tensor_identities() {
        let i4 = tensor(&Operator::identity(2), &Operator::identity(2), 4096).unwrap();
        assert_eq!(i4.matrix(), &CMatrix::identity(4, 4));
        let zi = tensor(&Operator::pauli_z(), &Operator::identity(2), 4096).unwrap();
        let expected = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, ONE, -ONE, -ONE]));
        assert_eq!(zi.matrix(), &expected);
        assert!(zi.is_hermitian_tagged());
    }

    #[test]
    fn tensor_matches_index_loop_oracle() {
        let mut rng = trial_rng(3, 0);
        for _ in 0..5 {
            let a = complex_gaussian_matrix(3, 3, &mut rng);
            let b = complex_gaussian_matrix(3, 3, &mut rng);
            let t = tensor(&op(a.clone()), &op(b.clone()), 4096).unwrap();
            assert_eq!(t.matrix(), &kron_oracle(&a, &b));
        }
        // CNOT-conjugated Pauli blocks
        let cx = Operator::cnot();
        let x_i = tensor(&Operator::pauli_x(), &Operator::identity(2), 16).unwrap();
        let conj = (&(&cx * &x_i) * &cx).into_matrix();
        let t = tensor(&op(conj.clone()), &Operator::pauli_y(), 64).unwrap();
        assert_eq!(t.matrix(), &kron_oracle(&conj, Operator::pauli_y().matrix()));
    }

    #[test]
    fn tensor_rejects_oversized_composites() {
        let a = Operator::identity(65);
        let err = tensor(&a, &a, 4096).unwrap_err();
        assert!(matches!(err, Error::ModelTooLarge { dim: 4225, max: 4096 }));
    }

    #[test]
    fn pauli_algebra() {
        let cxy = commutator(&Operator::pauli_x(), &Operator::pauli_y()).unwrap();
        assert_eq!(cxy.matrix(), &(Operator::pauli_z().matrix() * c(0.0, 2.0)));
        let xx = sym_product(&Operator::pauli_x(), &Operator::pauli_x()).unwrap();
        assert_eq!(xx.matrix(), &CMatrix::identity(2, 2));
    }

    #[test]
    fn commutator_shape_error() {
        let err = commutator(&Operator::identity(2), &Operator::identity(3)).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
        assert!(matches!(
            sym_product(&Operator::identity(2), &Operator::identity(3)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn truncated_oscillator_commutator_matches_entrywise_oracle() {
        let (x, y) = crate::oscillator::quadratures(8, 0.5);
        let got = commutator(&x, &y).unwrap();
        let want = commutator_oracle(x.matrix(), y.matrix());
        assert!(max_modulus(&(got.matrix() - want)) < 1e-14);
    }

    #[test]
    fn eigenstate_expectations() {
        let zero = QuantumState::basis(2, 0).unwrap();
        assert_eq!(expectation(&Operator::pauli_z(), &zero).unwrap(), ONE);
        let plus = QuantumState::normalized(CVector::from_vec(vec![ONE, ONE])).unwrap();
        assert_abs_diff_eq!(
            expectation(&Operator::pauli_x(), &plus).unwrap().re,
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn density_expectation_matches_spectral_decomposition() {
        let mut rng = trial_rng(5, 0);
        let rho = random_density(4, &mut rng);
        let a = op(random_hermitian(4, &mut rng));
        let state = QuantumState::density(rho.clone(), &Tolerances::default()).unwrap();
        let direct = expectation(&a, &state).unwrap();

        let eig = SymmetricEigen::new(rho);
        let mut oracle = ZERO;
        for k in 0..4 {
            let p = eig.eigenvalues[k];
            let v = eig.eigenvectors.column(k).into_owned();
            oracle += c(p, 0.0) * v.dotc(&(a.matrix() * &v));
        }
        assert!((direct - oracle).norm() < 1e-12);
    }

    #[test]
    fn expectation_shape_error() {
        let s = QuantumState::basis(3, 0).unwrap();
        assert!(matches!(expectation(&Operator::pauli_z(), &s), Err(Error::Shape(_))));
    }

    #[test]
    fn density_validation() {
        let tol = Tolerances::default();
        let bad_trace = CMatrix::identity(2, 2);
        assert!(QuantumState::density(bad_trace, &tol).is_err());
        let negative = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), ZERO, ZERO, c(-0.5, 0.0)]);
        assert!(QuantumState::density(negative, &tol).is_err());
        assert!(QuantumState::pure(CVector::from_vec(vec![ONE, ONE]), 1e-10).is_err());
    }

    #[test]
    fn centering() {
        let zero = QuantumState::basis(2, 0).unwrap();
        let cz = centered(&Operator::pauli_z(), &zero).unwrap();
        assert_eq!(cz.matrix(), &(Operator::pauli_z().matrix() - CMatrix::identity(2, 2)));
        let ci = centered(&Operator::identity(3), &QuantumState::basis(3, 1).unwrap()).unwrap();
        assert_eq!(ci.matrix(), &CMatrix::zeros(3, 3));

        let mut rng = trial_rng(9, 0);
        let a = Operator::hermitian(random_hermitian(5, &mut rng), 1e-12).unwrap();
        let psi = QuantumState::Pure(crate::random::random_pure_state(5, &mut rng));
        let again = expectation(&centered(&a, &psi).unwrap(), &psi).unwrap();
        assert!(again.norm() < 1e-12);
    }

    #[test]
    fn psd_identity_and_reference_matrix() {
        let v = psd_check(&CMatrix::identity(2, 2), 1e-10).unwrap();
        assert!(v.is_psd);
        assert_abs_diff_eq!(v.min_eigenvalue, 1.0, epsilon = 1e-15);
        assert!(v.refuting_vector.is_none());

        let m = CMatrix::from_row_slice(2, 2, &[c(0.25, 0.0), c(-0.5, 0.25), c(-0.5, -0.25), c(0.25, 0.0)]);
        let v = psd_check(&m, 1e-10).unwrap();
        assert!(!v.is_psd);
        assert_abs_diff_eq!(v.determinant, -0.25, epsilon = 1e-14);
        assert!(v.determinant_imag_residual < 1e-15);
        let w = v.refuting_vector.unwrap();
        assert!(w.dotc(&(&m * &w)).re < 0.0);
    }

    #[test]
    fn psd_rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        match psd_check(&m, 1e-10) {
            Err(Error::ContractViolation { residual, .. }) => assert_abs_diff_eq!(residual, 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gram_matrices_are_psd() {
        let mut rng = trial_rng(2, 0);
        for dim in 1..7 {
            let a = complex_gaussian_matrix(dim, dim, &mut rng);
            let gram = a.adjoint() * &a;
            assert!(psd_check(&gram, 1e-10).unwrap().is_psd);
        }
    }

    #[test]
    fn psd_verdict_agrees_with_random_sandwiches() {
        let mut rng = trial_rng(4, 0);
        for trial in 0..20 {
            // Shifted Gram matrices cross the PSD boundary for some trials.
            let a = complex_gaussian_matrix(4, 4, &mut rng);
            let shift = 0.2 * trial as f64;
            let m = a.adjoint() * &a - CMatrix::identity(4, 4) * c(shift, 0.0);
            let v = psd_check(&m, 1e-10).unwrap();
            if v.is_psd {
                for _ in 0..1000 {
                    let x = complex_gaussian_matrix(4, 1, &mut rng).column(0).into_owned();
                    let q = x.dotc(&(&m * &x)).re;
                    assert!(q >= -1e-10 * x.norm_squared() * v.scale);
                }
            } else {
                let w = v.refuting_vector.as_ref().unwrap();
                assert!(w.dotc(&(&m * w)).re < 0.0);
            }
        }
    }

    #[test]
    fn heisenberg_identity_and_cnot() {
        let tol = Tolerances::default();
        let zi = tensor(&Operator::identity(2), &Operator::pauli_z(), 16).unwrap();
        let same = heisenberg_out(&Operator::identity(4), &zi, &tol).unwrap();
        assert_eq!(same.matrix(), zi.matrix());

        let out = heisenberg_out(&Operator::cnot(), &zi, &tol).unwrap();
        let zz = tensor(&Operator::pauli_z(), &Operator::pauli_z(), 16).unwrap();
        // hand-checked: CNOT (I⊗Z) CNOT = Z⊗Z
        assert_eq!(out.matrix(), zz.matrix());
    }

    #[test]
    fn heisenberg_rejects_non_unitary() {
        let u = Operator::identity(2).scale(2.0);
        let err = heisenberg_out(&u, &Operator::pauli_z(), &Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::ContractViolation { .. }));
        assert!(Operator::unitary(CMatrix::identity(2, 2) * c(2.0, 0.0), 1e-10).is_err());
    }

    #[test]
    fn heisenberg_preserves_spectrum() {
        let mut rng = trial_rng(6, 0);
        let tol = Tolerances::default();
        for dim in [2, 4, 6] {
            let u = Operator::unitary(haar_unitary(dim, &mut rng), 1e-10).unwrap();
            let a = Operator::hermitian(random_hermitian(dim, &mut rng), 1e-12).unwrap();
            let out = heisenberg_out(&u, &a, &tol).unwrap();
            let before = hermitian_eigenvalues(a.matrix());
            let after = hermitian_eigenvalues(out.matrix());
            for (x, y) in before.iter().zip(&after) {
                assert!((x - y).abs() < 1e-10);
            }
            assert!(hermitian_residual(out.matrix()) < 1e-10);
        }
    }

    fn operand(dim: usize, seed: u64) -> CMatrix {
        complex_gaussian_matrix(dim, dim, &mut trial_rng(seed, dim as u64))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn kronecker_mixed_product(p in 2usize..=4, q in 2usize..=4, seed in any::<u64>()) {
            let (a, c_) = (op(operand(p, seed)), op(operand(p, seed ^ 1)));
            let (b, d) = (op(operand(q, seed ^ 2)), op(operand(q, seed ^ 3)));
            let lhs = &tensor(&a, &b, 4096).unwrap() * &tensor(&c_, &d, 4096).unwrap();
            let rhs = tensor(&(&a * &c_), &(&b * &d), 4096).unwrap();
            prop_assert!(max_modulus(&(lhs.matrix() - rhs.matrix())) < 1e-12);
        }

        #[test]
        fn commutator_antisymmetry(dim in 1usize..=5, seed in any::<u64>()) {
            let a = op(operand(dim, seed));
            let b = op(operand(dim, !seed));
            let ab = commutator(&a, &b).unwrap();
            let ba = commutator(&b, &a).unwrap();
            prop_assert_eq!(ab.matrix(), &(-ba.matrix()));
            prop_assert_eq!(sym_product(&a, &b).unwrap(), sym_product(&b, &a).unwrap());
        }

        #[test]
        fn expectation_is_linear(dim in 1usize..=5, seed in any::<u64>(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
            let mut rng = trial_rng(seed, 0);
            let a = op(complex_gaussian_matrix(dim, dim, &mut rng));
            let b = op(complex_gaussian_matrix(dim, dim, &mut rng));
            let s = QuantumState::Pure(crate::random::random_pure_state(dim, &mut rng));
            let combo = &a.scale(alpha) + &b.scale(beta);
            let lhs = expectation(&combo, &s).unwrap();
            let rhs = expectation(&a, &s).unwrap() * alpha + expectation(&b, &s).unwrap() * beta;
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }

        #[test]
        fn heisenberg_preserves_commutators(dim in 2usize..=5, seed in any::<u64>()) {
            let mut rng = trial_rng(seed, 1);
            let tol = Tolerances::default();
            let u = Operator::unitary(haar_unitary(dim, &mut rng), 1e-10).unwrap();
            let a = Operator::hermitian(random_hermitian(dim, &mut rng), 1e-12).unwrap();
            let b = Operator::hermitian(random_hermitian(dim, &mut rng), 1e-12).unwrap();
            let lhs = heisenberg_out(&u, &commutator(&a, &b).unwrap(), &tol).unwrap();
            let rhs = commutator(&heisenberg_out(&u, &a, &tol).unwrap(), &heisenberg_out(&u, &b, &tol).unwrap()).unwrap();
            prop_assert!(max_modulus(&(lhs.matrix() - rhs.matrix())) < 1e-12);
        }
    }
}
