//! Seeded samplers for fuzzing and property tests.
//!
//! Every sampler takes the generator explicitly; campaigns derive one
//! independent ChaCha stream per trial with [`trial_rng`] so that results do
//! not depend on scheduling.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operators::{CMatrix, CVector};

/// Generator for trial `index` of a campaign seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix: i.i.d. standard complex normal entries.
pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unitary via QR of a Ginibre matrix, with the phases of
/// R's diagonal absorbed into Q.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = complex_gaussian_matrix(dim, dim, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Uniformly distributed pure state (normalized complex Gaussian vector).
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = DVector::from_fn(dim, |_, _| complex_gaussian(rng));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = complex_gaussian_matrix(dim, dim, rng);
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Full-rank density matrix G G† / tr(G G†).
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = complex_gaussian_matrix(dim, dim, rng);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// `count` pairwise commuting Hermitian matrices sharing a random eigenbasis.
pub fn random_commuting_family<R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> Vec<CMatrix> {
    let basis = haar_unitary(dim, rng);
    (0..count)
        .map(|_| {
            let diag = DMatrix::from_fn(dim, dim, |i, j| {
                if i == j {
                    Complex64::new(rng.sample::<f64, _>(StandardNormal), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let m = &basis * diag * basis.adjoint();
            (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
        })
        .collect()
}

pub fn uniform_symmetric<R: Rng + ?Sized>(dim: usize, scale: f64, rng: &mut R) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let x = rng.random_range(-1.0..=1.0) * scale;
            h[(i, j)] = x;
            h[(j, i)] = x;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = trial_rng(7, 0);
        for dim in 1..6 {
            let u = haar_unitary(dim, &mut rng);
            let err = crate::operators::max_modulus(&(&u * u.adjoint() - CMatrix::identity(dim, dim)));
            assert!(err < 1e-12, "dim {dim}: {err}");
        }
    }

    #[test]
    fn trial_streams_are_reproducible_and_distinct() {
        let a: Vec<f64> = (0..4).map(|_| trial_rng(11, 3).random()).collect();
        let b: Vec<f64> = (0..4).map(|_| trial_rng(11, 3).random()).collect();
        assert_eq!(a, b);
        let x: f64 = trial_rng(11, 3).random();
        let y: f64 = trial_rng(11, 4).random();
        assert_ne!(x, y);
    }

    #[test]
    fn commuting_family_commutes() {
        let mut rng = trial_rng(1, 1);
        let fam = random_commuting_family(4, 3, &mut rng);
        for a in &fam {
            for b in &fam {
                assert!(crate::operators::max_modulus(&(a * b - b * a)) < 1e-12);
            }
        }
    }
}
