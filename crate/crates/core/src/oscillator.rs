//! Truncated harmonic-oscillator realizations of canonical quadratures.
//!
//! Truncation breaks `[X, Y] = i c` in the top Fock level only, so results are
//! trustworthy for states supported on low-lying levels.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{LinearObservable, QUADRATURE_COMM};
use crate::measurement::{FiniteModel, MeasurementModel};
use crate::operators::{tensor, CMatrix, Operator, OperatorRole, QuantumState};
use crate::tolerance::Tolerances;

/// Lowering operator on Fock levels `0..dim`.
pub fn annihilation(dim: usize) -> CMatrix {
    DMatrix::from_fn(dim, dim, |r, c| {
        if c == r + 1 {
            Complex64::new((c as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `X = √(c/2)(a + a†)` and `Y = −i√(c/2)(a − a†)`, so `[X, Y] = i c` below
/// the cutoff.
pub fn quadratures(dim: usize, c: f64) -> (Operator, Operator) {
    let a = annihilation(dim);
    let ad = a.adjoint();
    let s = (c / 2.0).sqrt();
    let x = (&a + &ad) * Complex64::new(s, 0.0);
    let y = (&a - &ad) * Complex64::new(0.0, -s);
    (
        Operator::from_trusted(x, OperatorRole::Hermitian),
        Operator::from_trusted(y, OperatorRole::Hermitian),
    )
}

/// `(X⊗I, Y⊗I, I⊗X, I⊗Y)` for two copies of the same mode.
pub fn two_mode_quadratures(x: &Operator, y: &Operator) -> Vec<Operator> {
    let id = Operator::identity(x.dim());
    let max = x.dim() * x.dim();
    [(x, &id), (y, &id), (&id, x), (&id, y)]
        .into_iter()
        .map(|(l, r)| tensor(l, r, max).expect("square of a valid dimension"))
        .collect()
}

/// `Σ u_k z_k + offset·I` over the given quadrature operators.
pub fn linear_operator(u: &LinearObservable, quads: &[Operator]) -> Operator {
    assert_eq!(u.len(), quads.len(), "coefficient count must match quadrature count");
    let dim = quads[0].dim();
    let mut m = CMatrix::identity(dim, dim) * Complex64::new(u.offset, 0.0);
    for (k, q) in quads.iter().enumerate() {
        m += q.matrix() * Complex64::new(u.coeffs[k], 0.0);
    }
    Operator::from_trusted(m, OperatorRole::Hermitian)
}

fn real_eigen(op: &Operator) -> SymmetricEigen<Complex64, nalgebra::Dyn> {
    SymmetricEigen::new(op.matrix().clone())
}

/// `exp(−iθ P⊗Q)` for Hermitian `P`, `Q`, from their separate eigenbases.
pub fn product_exponential(p: &Operator, q: &Operator, theta: f64) -> Operator {
    let ep = real_eigen(p);
    let eq = real_eigen(q);
    let v = ep.eigenvectors.kronecker(&eq.eigenvectors);
    let dq = q.dim();
    let phases = nalgebra::DVector::from_fn(p.dim() * dq, |k, _| {
        let lambda = ep.eigenvalues[k / dq] * eq.eigenvalues[k % dq];
        Complex64::from_polar(1.0, -theta * lambda)
    });
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    Operator::from_trusted(crate::operators::matmul(&scaled, &v.adjoint()), OperatorRole::Unitary)
}

/// Amplifier realized on two truncated oscillators with `dim` levels each,
/// vacuum object and vacuum probe, interaction `exp(−i(G/c) X_a Y_b)`.
pub fn bae_finite_model(gain: f64, dim: usize) -> Result<MeasurementModel> {
    if !(gain.is_finite() && gain > 0.0) {
        return Err(Error::Domain(format!("gain must be positive, got {gain}")));
    }
    if dim < 2 {
        return Err(Error::Domain(format!(
            "oscillator cutoff must be at least 2, got {dim}"
        )));
    }
    let c = QUADRATURE_COMM;
    let (x, y) = quadratures(dim, c);
    let model = FiniteModel {
        object_state: QuantumState::basis(dim, 0)?,
        probe_state: QuantumState::basis(dim, 0)?,
        a: vec![x.clone()],
        b: vec![y.clone()],
        m: vec![x.scale(1.0 / gain)],
        interaction: product_exponential(&x, &y, gain / c),
    };
    MeasurementModel::finite(
        Some(format!("bae-oscillator(gain={gain}, cutoff={dim})")),
        model,
        &Tolerances::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{commutator, hermitian_residual, unitary_residual};

    #[test]
    fn commutator_is_canonical_below_cutoff() {
        let (x, y) = quadratures(10, 0.5);
        let comm = commutator(&x, &y).unwrap();
        for k in 0..9 {
            assert!((comm.matrix()[(k, k)] - Complex64::new(0.0, 0.5)).norm() < 1e-14);
        }
        assert!(hermitian_residual(x.matrix()) == 0.0 && hermitian_residual(y.matrix()) == 0.0);
    }

    #[test]
    fn product_exponential_matches_dense_exponential() {
        let (x, y) = quadratures(4, 0.5);
        let theta = 0.7;
        let u = product_exponential(&x, &y, theta);
        let gen = tensor(&x, &y, 16).unwrap().into_matrix() * Complex64::new(0.0, -theta);
        let dense = gen.exp();
        assert!(crate::operators::max_modulus(&(u.matrix() - dense)) < 1e-12);
        assert!(unitary_residual(u.matrix()) < 1e-12);
    }

    #[test]
    fn vacuum_variances() {
        let (x, _) = quadratures(6, 0.5);
        let vac = QuantumState::basis(6, 0).unwrap();
        let xx = crate::operators::expectation(&(&x * &x), &vac).unwrap();
        assert!((xx.re - 0.25).abs() < 1e-15);
    }
}
