//! Real symplectic group utilities and covariance experiments on the
//! noise-disturbance matrices.
//!
//! Matrices here act on the collective vector `(N_1, …, N_n, D_1, …, D_n)`,
//! so the standard form is the block matrix `J = [[0, I], [-I, 0]]`. The
//! Gaussian backend orders its canonical vector mode by mode instead; use
//! [`block_to_interleaved`] to move between the two.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurement::{analyze, oup_matrix, MeasurementModel, ScalarCheck};
use crate::operators::{psd_check_with, PsdVerdict};
use crate::random::{trial_rng, uniform_symmetric};
use crate::serial;
use crate::tolerance::Tolerances;

/// Block standard form `[[0, I_n], [-I_n, 0]]`.
pub fn standard_form(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = 1.0;
        j[(n + k, k)] = -1.0;
    }
    j
}

/// Reorders a `2n × 2n` matrix from `(q_1..q_n, p_1..p_n)` to
/// `(q_1, p_1, …, q_n, p_n)` ordering.
pub fn block_to_interleaved(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows() / 2;
    let source = |i: usize| if i.is_multiple_of(2) { i / 2 } else { n + i / 2 };
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(source(i), source(j))])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymplecticCheck {
    pub holds: bool,
    pub residual: f64,
}

/// `max |S J Sᵀ − J|` against `tol`.
pub fn is_symplectic(matrix: &DMatrix<f64>, tol: f64) -> Result<SymplecticCheck> {
    if !matrix.is_square() || !matrix.nrows().is_multiple_of(2) || matrix.nrows() == 0 {
        return Err(Error::Shape(format!(
            "symplectic test needs an even square matrix, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let j = standard_form(matrix.nrows() / 2);
    let residual = (matrix * &j * matrix.transpose() - &j).amax();
    Ok(SymplecticCheck {
        holds: residual <= tol,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap {
    n: usize,
    matrix: DMatrix<f64>,
}

impl SymplecticMap {
    pub fn new(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        let check = is_symplectic(&matrix, tol)?;
        if !check.holds {
            return Err(Error::ContractViolation {
                what: "matrix is not symplectic".into(),
                residual: check.residual,
            });
        }
        Ok(Self {
            n: matrix.nrows() / 2,
            matrix,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            matrix: DMatrix::identity(2 * n, 2 * n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `S ↦ S X Sᵀ`.
    pub fn congruence(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.nrows() != self.matrix.nrows() || x.ncols() != self.matrix.ncols() {
            return Err(Error::Shape(format!(
                "congruence by a {0}x{0} map needs a {0}x{0} matrix, got {1}x{2}",
                self.matrix.nrows(),
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(&self.matrix * x * self.matrix.transpose())
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Shape("symplectic maps of different sizes".into()));
        }
        Ok(Self {
            n: self.n,
            matrix: &self.matrix * &other.matrix,
        })
    }
}

/// Phase-space rotation `[[cos θ, sin θ], [−sin θ, cos θ]]` acting on `(N, D)`.
pub fn rotation(angle: f64) -> SymplecticMap {
    let (s, c) = angle.sin_cos();
    SymplecticMap {
        n: 1,
        matrix: DMatrix::from_row_slice(2, 2, &[c, s, -s, c]),
    }
}

/// `exp(J H)` with `H` symmetric, entries uniform in `[−1, 1] / (2n)`.
pub fn random_symplectic(n: usize, seed: u64) -> Result<SymplecticMap> {
    if n == 0 {
        return Err(Error::Domain("symplectic dimension must be at least 1".into()));
    }
    let mut rng = trial_rng(seed, 0);
    let h = uniform_symmetric(2 * n, 1.0 / (2.0 * n as f64), &mut rng);
    let generator = standard_form(n) * h;
    SymplecticMap::new(generator.exp(), 1e-10)
}

/// Transformed `(K, Γ, 𝒢)` triple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformedNd {
    #[serde(with = "serial::real_matrix")]
    pub k_matrix: DMatrix<f64>,
    #[serde(with = "serial::real_matrix")]
    pub gamma: DMatrix<f64>,
    #[serde(with = "serial::real_matrix")]
    pub gexp: DMatrix<f64>,
    /// True when `𝒢 = γJ`, so that congruence leaves it fixed.
    pub invariance_premise: bool,
}

fn proportional_to_standard_form(gexp: &DMatrix<f64>, tol: f64) -> Option<f64> {
    let n = gexp.nrows() / 2;
    let gamma = gexp[(0, n)];
    let residual = (gexp - standard_form(n) * gamma).amax();
    (residual <= tol * gamma.abs().max(1.0)).then_some(gamma)
}

/// Congruence of the noise-disturbance matrices by `s`. When `𝒢` is a
/// multiple of the standard form it is kept fixed; otherwise it is
/// transformed too and the premise flag is cleared.
pub fn transform_nd(
    s: &SymplecticMap,
    k_matrix: &DMatrix<f64>,
    gamma: &DMatrix<f64>,
    gexp: &DMatrix<f64>,
    tol: f64,
) -> Result<TransformedNd> {
    let k_t = s.congruence(k_matrix)?;
    let gamma_t = s.congruence(gamma)?;
    let (gexp_t, premise) = match proportional_to_standard_form(gexp, tol) {
        Some(_) => (gexp.clone(), true),
        None => (s.congruence(gexp)?, false),
    };
    Ok(TransformedNd {
        k_matrix: k_t,
        gamma: gamma_t,
        gexp: gexp_t,
        invariance_premise: premise,
    })
}

/// Outcome of rotating the single-pair noise-disturbance vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationRecord {
    pub angle: f64,
    /// `γ` in `𝒢 = γJ`.
    pub gamma_constant: f64,
    #[serde(with = "serial::real_matrix")]
    pub k_before: DMatrix<f64>,
    #[serde(with = "serial::real_matrix")]
    pub k_after: DMatrix<f64>,
    pub epsilon: f64,
    pub eta: f64,
    pub correlation: f64,
    pub epsilon_rotated: f64,
    pub eta_rotated: f64,
    pub correlation_rotated: f64,
    /// `εη ≥ |γ|/2` on the original quantities.
    pub product_bound_before: ScalarCheck,
    /// The same scalar form naively applied to the rotated quantities.
    pub product_bound_after: ScalarCheck,
    /// `ε′² + η′² ≥ √(γ² + 4 k′²)`: the original product bound rewritten in
    /// rotated variables. Only evaluated for quarter-turn angles (π/4 mod π).
    pub rotated_sum_bound: Option<ScalarCheck>,
    pub matrix_before: PsdVerdict,
    pub matrix_after: PsdVerdict,
    pub verdict_unchanged: bool,
}

fn is_quarter_turn(angle: f64) -> bool {
    let r = (angle - std::f64::consts::FRAC_PI_4).rem_euclid(std::f64::consts::PI);
    r < 1e-12 || std::f64::consts::PI - r < 1e-12
}

/// Rotation experiment on explicit matrices. Requires `n = 1` and `Γ = 0`.
pub fn rotated_ozawa(
    k_matrix: &DMatrix<f64>,
    gamma: &DMatrix<f64>,
    gexp: &DMatrix<f64>,
    angle: f64,
    tol: &Tolerances,
) -> Result<RotationRecord> {
    if k_matrix.shape() != (2, 2) || gamma.shape() != (2, 2) || gexp.shape() != (2, 2) {
        return Err(Error::Premise {
            what: "rotation experiment needs a single noise-disturbance pair".into(),
            residual: f64::NAN,
        });
    }
    let gamma_residual = gamma.amax();
    if gamma_residual > tol.norm * gexp.amax().max(1.0) {
        return Err(Error::Premise {
            what: "interaction is not of independent intervention (nonzero cross-commutator matrix)".into(),
            residual: gamma_residual,
        });
    }
    let gamma_constant = proportional_to_standard_form(gexp, tol.norm).ok_or_else(|| Error::Premise {
        what: "commutator expectation matrix is not a multiple of the standard form".into(),
        residual: (gexp + gexp.transpose()).amax(),
    })?;

    let rot = rotation(angle);
    let k_after = rot.congruence(k_matrix)?;
    let zero = DMatrix::zeros(2, 2);
    let matrix_before = psd_check_with(&oup_matrix(k_matrix, &zero, gexp), tol)?;
    let matrix_after = psd_check_with(&oup_matrix(&k_after, &zero, gexp), tol)?;

    let bound = gamma_constant.abs() / 2.0;
    let (epsilon, eta) = (k_matrix[(0, 0)].max(0.0).sqrt(), k_matrix[(1, 1)].max(0.0).sqrt());
    let (epsilon_rotated, eta_rotated) = (k_after[(0, 0)].max(0.0).sqrt(), k_after[(1, 1)].max(0.0).sqrt());
    let correlation_rotated = k_after[(0, 1)];
    let rotated_sum_bound = is_quarter_turn(angle).then(|| {
        ScalarCheck::new(
            k_after[(0, 0)] + k_after[(1, 1)],
            (gamma_constant * gamma_constant + 4.0 * correlation_rotated * correlation_rotated).sqrt(),
            tol.psd,
        )
    });

    Ok(RotationRecord {
        angle,
        gamma_constant,
        k_before: k_matrix.clone(),
        k_after,
        epsilon,
        eta,
        correlation: k_matrix[(0, 1)],
        epsilon_rotated,
        eta_rotated,
        correlation_rotated,
        product_bound_before: ScalarCheck::new(epsilon * eta, bound, tol.psd),
        product_bound_after: ScalarCheck::new(epsilon_rotated * eta_rotated, bound, tol.psd),
        rotated_sum_bound,
        verdict_unchanged: matrix_before.is_psd == matrix_after.is_psd,
        matrix_before,
        matrix_after,
    })
}

/// Rotates the noise-disturbance vector of a single-pair model by `angle`.
pub fn rotated_ozawa_experiment(model: &MeasurementModel, angle: f64, tol: &Tolerances) -> Result<RotationRecord> {
    if model.n() != 1 {
        return Err(Error::Premise {
            what: format!("rotation experiment needs n = 1, model has n = {}", model.n()),
            residual: f64::NAN,
        });
    }
    let report = analyze(model, tol)?;
    rotated_ozawa(&report.k_matrix, &report.gamma, &report.gexp, angle, tol)
}

/// Matrix-inequality verdict `K + (i/2)(Γ + 𝒢) ⪰ 0` before and after
/// congruence by each map.
pub fn verdict_invariance(
    maps: &[SymplecticMap],
    k_matrix: &DMatrix<f64>,
    gamma: &DMatrix<f64>,
    gexp: &DMatrix<f64>,
    tol: &Tolerances,
) -> Result<Vec<(PsdVerdict, PsdVerdict)>> {
    let before = psd_check_with(&oup_matrix(k_matrix, gamma, gexp), tol)?;
    maps.iter()
        .map(|s| {
            let t = transform_nd(s, k_matrix, gamma, gexp, tol.norm)?;
            let after = psd_check_with(&oup_matrix(&t.k_matrix, &t.gamma, &t.gexp), tol)?;
            Ok((before.clone(), after))
        })
        .collect()
}

/// `K + (iγ/2) J` as a complex matrix.
pub fn shifted_by_form(k_matrix: &DMatrix<f64>, gamma_constant: f64) -> DMatrix<Complex64> {
    let j = standard_form(k_matrix.nrows() / 2);
    DMatrix::from_fn(k_matrix.nrows(), k_matrix.ncols(), |r, c| {
        Complex64::new(k_matrix[(r, c)], 0.5 * gamma_constant * j[(r, c)])
    })
}
