//! Moment-level backend for canonical (continuous-variable) systems.
//!
//! The canonical vector is ordered mode by mode, `z = (X_1, Y_1, X_2, Y_2, …)`,
//! with `[X_k, Y_k] = i c`. Observables are affine forms `u·z + offset`, states
//! are first and second moments, and interactions are real linear maps on `z`
//! in the Heisenberg picture.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measurement::{GaussianModel, MeasurementModel};
use crate::operators::{psd_check_with, PsdVerdict};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalAlgebra {
    modes: usize,
    comm_constant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    Y,
}

impl CanonicalAlgebra {
    pub fn new(modes: usize, comm_constant: f64) -> Result<Self> {
        if modes == 0 {
            return Err(Error::Domain("canonical algebra needs at least one mode".into()));
        }
        if !(comm_constant.is_finite() && comm_constant > 0.0) {
            return Err(Error::Domain(format!(
                "commutation constant must be positive, got {comm_constant}"
            )));
        }
        Ok(Self { modes, comm_constant })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn comm_constant(&self) -> f64 {
        self.comm_constant
    }

    /// Length of the canonical vector, `2m`.
    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    /// Commutation form `Ω = c·(J ⊕ … ⊕ J)`, so `[z_α, z_β] = i Ω_αβ`.
    pub fn form(&self) -> DMatrix<f64> {
        let mut omega = DMatrix::zeros(self.dim(), self.dim());
        for k in 0..self.modes {
            omega[(2 * k, 2 * k + 1)] = self.comm_constant;
            omega[(2 * k + 1, 2 * k)] = -self.comm_constant;
        }
        omega
    }

    pub fn quadrature(&self, mode: usize, which: Quadrature) -> Result<LinearObservable> {
        if mode >= self.modes {
            return Err(Error::Shape(format!(
                "mode {mode} out of range for {} modes",
                self.modes
            )));
        }
        let mut coeffs = DVector::zeros(self.dim());
        coeffs[2 * mode + usize::from(which == Quadrature::Y)] = 1.0;
        Ok(LinearObservable::new(coeffs, 0.0))
    }
}

/// Affine observable `coeffs·z + offset·I`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearObservable {
    pub coeffs: DVector<f64>,
    pub offset: f64,
}

impl LinearObservable {
    pub fn new(coeffs: DVector<f64>, offset: f64) -> Self {
        Self { coeffs, offset }
    }

    pub fn zero(len: usize) -> Self {
        Self::new(DVector::zeros(len), 0.0)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(&self.coeffs * factor, self.offset * factor)
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Shape(format!(
                "observable lengths {} and {} differ",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        Ok(Self::new(&self.coeffs + &other.coeffs, self.offset + other.offset))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        Ok(Self::new(&self.coeffs - &other.coeffs, self.offset - other.offset))
    }
}

/// First and second moments. `cov_αβ = ⟨(Δz_α Δz_β + Δz_β Δz_α)/2⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMoments {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

const SYMMETRY_TOL: f64 = 1e-12;

impl GaussianMoments {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != cov.ncols() || cov.nrows() != mean.len() || !mean.len().is_multiple_of(2) || mean.is_empty() {
            return Err(Error::Shape(format!(
                "moments need an even-length mean and matching square covariance, got mean {} and cov {}x{}",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            )));
        }
        let scale = cov.amax().max(1.0);
        let residual = (&cov - cov.transpose()).amax() / scale;
        if residual > SYMMETRY_TOL {
            return Err(Error::ContractViolation {
                what: "covariance matrix is not symmetric".into(),
                residual,
            });
        }
        Ok(Self { mean, cov })
    }

    /// Vacuum: zero mean, covariance `(c/2) I`.
    pub fn vacuum(alg: &CanonicalAlgebra) -> Self {
        let dim = alg.dim();
        Self {
            mean: DVector::zeros(dim),
            cov: DMatrix::identity(dim, dim) * (alg.comm_constant() / 2.0),
        }
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    /// Moments of the product state `self ⊗ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (p, q) = (self.dim(), other.dim());
        let mut mean = DVector::zeros(p + q);
        mean.rows_mut(0, p).copy_from(&self.mean);
        mean.rows_mut(p, q).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(p + q, p + q);
        cov.view_mut((0, 0), (p, p)).copy_from(&self.cov);
        cov.view_mut((p, p), (q, q)).copy_from(&other.cov);
        Self { mean, cov }
    }
}

/// Real linear Heisenberg-picture map `z ↦ S z` that preserves the
/// commutation form.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearChannel {
    matrix: DMatrix<f64>,
}

/// `max |S Ω Sᵀ - Ω|`.
pub fn form_residual(s: &DMatrix<f64>, omega: &DMatrix<f64>) -> f64 {
    (s * omega * s.transpose() - omega).amax()
}

impl LinearChannel {
    pub fn new(matrix: DMatrix<f64>, alg: &CanonicalAlgebra, tol: f64) -> Result<Self> {
        if matrix.nrows() != alg.dim() || matrix.ncols() != alg.dim() {
            return Err(Error::Shape(format!(
                "channel must be {0}x{0}, got {1}x{2}",
                alg.dim(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let omega = alg.form();
        let residual = form_residual(&matrix, &omega) / alg.comm_constant();
        if residual > tol {
            return Err(Error::ContractViolation {
                what: "channel does not preserve the commutation form".into(),
                residual,
            });
        }
        Ok(Self { matrix })
    }

    pub fn identity(alg: &CanonicalAlgebra) -> Self {
        Self {
            matrix: DMatrix::identity(alg.dim(), alg.dim()),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The channel that applies `self` and then `next`, in the sense that
    /// `apply_channel(&a.followed_by(&b), u) == apply_channel(&b, &apply_channel(&a, u))`.
    pub fn followed_by(&self, next: &Self) -> Result<Self> {
        if self.dim() != next.dim() {
            return Err(Error::Shape("channels act on different mode counts".into()));
        }
        Ok(Self {
            matrix: &self.matrix * &next.matrix,
        })
    }
}

fn check_obs(u: &LinearObservable, dim: usize, what: &str) -> Result<()> {
    if u.len() != dim {
        return Err(Error::Shape(format!(
            "{what}: observable has {} coefficients, expected {dim}",
            u.len()
        )));
    }
    Ok(())
}

/// `⟨[u, v]⟩ = i u Ω vᵀ`, a state-independent scalar.
pub fn lin_commutator(u: &LinearObservable, v: &LinearObservable, alg: &CanonicalAlgebra) -> Result<Complex64> {
    check_obs(u, alg.dim(), "commutator")?;
    check_obs(v, alg.dim(), "commutator")?;
    let value = u.coeffs.dot(&(alg.form() * &v.coeffs));
    Ok(Complex64::new(0.0, value))
}

pub fn moment_expectation(u: &LinearObservable, mom: &GaussianMoments) -> Result<f64> {
    check_obs(u, mom.dim(), "expectation")?;
    Ok(u.coeffs.dot(&mom.mean) + u.offset)
}

/// Symmetrized covariance `u Σ vᵀ`; independent of means and offsets.
pub fn moment_sym_cov(u: &LinearObservable, v: &LinearObservable, mom: &GaussianMoments) -> Result<f64> {
    check_obs(u, mom.dim(), "covariance")?;
    check_obs(v, mom.dim(), "covariance")?;
    Ok(u.coeffs.dot(&(&mom.cov * &v.coeffs)))
}

/// Heisenberg pullback: the out-observable expressed in in-variables,
/// `coeffs ↦ coeffs · S`.
pub fn apply_channel(s: &LinearChannel, u: &LinearObservable) -> Result<LinearObservable> {
    check_obs(u, s.dim(), "channel")?;
    let coeffs = s.matrix.tr_mul(&u.coeffs);
    Ok(LinearObservable::new(coeffs, u.offset))
}

/// Verdict on `cov + (i/2) Ω ⪰ 0`, the condition for the moments to belong
/// to a quantum state.
pub fn physicality_check(mom: &GaussianMoments, alg: &CanonicalAlgebra, tol: &Tolerances) -> Result<PsdVerdict> {
    if mom.dim() != alg.dim() {
        return Err(Error::Shape(format!(
            "moments of dimension {} do not match algebra of dimension {}",
            mom.dim(),
            alg.dim()
        )));
    }
    let omega = alg.form();
    let m = DMatrix::from_fn(mom.dim(), mom.dim(), |i, j| {
        Complex64::new(mom.cov[(i, j)], 0.5 * omega[(i, j)])
    });
    psd_check_with(&m, tol)
}

/// Quadrature commutation constant of the amplifier model, `[X, Y] = i/2`.
pub const QUADRATURE_COMM: f64 = 0.5;

/// Two-mode backaction-evading amplifier on `(X_a, Y_a, X_b, Y_b)`:
/// `X_b → X_b + G X_a`, `Y_a → Y_a − G Y_b`, `X_a` and `Y_b` untouched.
pub fn bae_channel_matrix(gain: f64) -> DMatrix<f64> {
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        1.0,  0.0, 0.0,  0.0,
        0.0,  1.0, 0.0, -gain,
        gain, 0.0, 1.0,  0.0,
        0.0,  0.0, 0.0,  1.0,
    ]);
    m
}

/// Probe moments of the reference amplifier example. They violate the
/// Robertson-Schrödinger condition; see [`physicality_check`].
pub fn reference_probe_moments() -> GaussianMoments {
    GaussianMoments {
        mean: DVector::zeros(2),
        cov: DMatrix::from_row_slice(2, 2, &[0.25, 0.5, 0.5, 0.25]),
    }
}

/// Amplifier model with vacuum object and the reference probe moments.
pub fn bae_model(gain: f64) -> Result<MeasurementModel> {
    let single = CanonicalAlgebra::new(1, QUADRATURE_COMM)?;
    bae_model_with(gain, GaussianMoments::vacuum(&single), reference_probe_moments())
}

/// Amplifier model with `A = X_a`, `B = Y_a` and meter `M = X_b / G`.
pub fn bae_model_with(gain: f64, object: GaussianMoments, probe: GaussianMoments) -> Result<MeasurementModel> {
    if !(gain.is_finite() && gain > 0.0) {
        return Err(Error::Domain(format!("gain must be positive, got {gain}")));
    }
    if object.modes() != 1 || probe.modes() != 1 {
        return Err(Error::Shape(
            "amplifier model needs single-mode object and probe moments".into(),
        ));
    }
    let alg = CanonicalAlgebra::new(2, QUADRATURE_COMM)?;
    let tol = Tolerances::default();
    let channel = LinearChannel::new(bae_channel_matrix(gain), &alg, tol.unitary)?;
    let a = alg.quadrature(0, Quadrature::X)?;
    let b = alg.quadrature(0, Quadrature::Y)?;
    let m = alg.quadrature(1, Quadrature::X)?.scaled(1.0 / gain);
    let model = GaussianModel {
        algebra: alg,
        object_modes: 1,
        object,
        probe,
        a: vec![a],
        b: vec![b],
        m: vec![m],
        channel,
    };
    MeasurementModel::gaussian(Some(format!("bae(gain={gain})")), model, &tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{build_nd_system, NdSystem};
    use crate::random::trial_rng;
    use crate::symplectic::random_symplectic;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn quad(alg: &CanonicalAlgebra, mode: usize, q: Quadrature) -> LinearObservable {
        alg.quadrature(mode, q).unwrap()
    }

    #[test]
    fn quadrature_commutators() {
        let alg = CanonicalAlgebra::new(2, 0.5).unwrap();
        let xa = quad(&alg, 0, Quadrature::X);
        let ya = quad(&alg, 0, Quadrature::Y);
        let xb = quad(&alg, 1, Quadrature::X);
        assert_eq!(lin_commutator(&xa, &ya, &alg).unwrap(), Complex64::new(0.0, 0.5));
        assert_eq!(lin_commutator(&xa, &xb, &alg).unwrap(), Complex64::new(0.0, 0.0));
        let offset = LinearObservable::new(xa.coeffs.clone(), 3.0);
        assert_eq!(lin_commutator(&offset, &ya, &alg).unwrap(), Complex64::new(0.0, 0.5));
    }

    #[test]
    fn shape_errors() {
        let alg = CanonicalAlgebra::new(1, 0.5).unwrap();
        let u = LinearObservable::zero(4);
        assert!(matches!(lin_commutator(&u, &u, &alg), Err(Error::Shape(_))));
        let mom = GaussianMoments::vacuum(&alg);
        assert!(matches!(moment_sym_cov(&u, &u, &mom), Err(Error::Shape(_))));
        assert!(GaussianMoments::new(DVector::zeros(3), DMatrix::zeros(3, 3)).is_err());
        assert!(CanonicalAlgebra::new(0, 1.0).is_err());
        assert!(CanonicalAlgebra::new(1, -1.0).is_err());
    }

    #[test]
    fn lin_commutator_matches_truncated_oscillators() {
        let c = 0.5;
        let dim = 30;
        let alg = CanonicalAlgebra::new(2, c).unwrap();
        let (x, y) = crate::oscillator::quadratures(dim, c);
        let quads = crate::oscillator::two_mode_quadratures(&x, &y);
        let mut rng = trial_rng(17, 0);
        for _ in 0..3 {
            let u = LinearObservable::new(DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0)), 0.0);
            let v = LinearObservable::new(DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0)), 0.0);
            let expected = lin_commutator(&u, &v, &alg).unwrap();
            let uo = crate::oscillator::linear_operator(&u, &quads).into_matrix();
            let vo = crate::oscillator::linear_operator(&v, &quads).into_matrix();
            let entry = |r: usize, c: usize| (uo.row(r) * vo.column(c) - vo.row(r) * uo.column(c))[(0, 0)];
            // low-lying number states |j, k⟩ with j, k < 5
            for j in 0..5 {
                for k in 0..5 {
                    let row = j * dim + k;
                    for jj in 0..5 {
                        for kk in 0..5 {
                            let col = jj * dim + kk;
                            let want = if row == col { expected } else { Complex64::new(0.0, 0.0) };
                            assert!((entry(row, col) - want).norm() < 1e-6);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn reference_moments_against_noise_vector() {
        for gain in [0.5, 1.0, 2.0, 4.0] {
            let model = bae_model(gain).unwrap();
            let NdSystem::Gaussian(sys) = build_nd_system(&model, &Tolerances::default()).unwrap() else {
                panic!("gaussian model expected");
            };
            let (n, d) = (&sys.k[0], &sys.k[1]);
            assert_abs_diff_eq!(
                moment_sym_cov(n, n, &sys.moments).unwrap(),
                1.0 / (4.0 * gain * gain),
                epsilon = 1e-15
            );
            assert_abs_diff_eq!(moment_sym_cov(n, d, &sys.moments).unwrap(), -0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(
                moment_sym_cov(d, d, &sys.moments).unwrap(),
                gain * gain / 4.0,
                epsilon = 1e-15
            );
        }
        assert_eq!(
            moment_expectation(
                &LinearObservable::zero(4),
                &GaussianMoments::vacuum(&CanonicalAlgebra::new(2, 0.5).unwrap())
            )
            .unwrap(),
            0.0
        );
    }

    #[test]
    fn amplifier_channel_outputs() {
        let alg = CanonicalAlgebra::new(2, 0.5).unwrap();
        let g = 1.7;
        let s = LinearChannel::new(bae_channel_matrix(g), &alg, 1e-10).unwrap();
        let ya_out = apply_channel(&s, &quad(&alg, 0, Quadrature::Y)).unwrap();
        let want = quad(&alg, 0, Quadrature::Y)
            .try_sub(&quad(&alg, 1, Quadrature::Y).scaled(g))
            .unwrap();
        assert_eq!(ya_out, want);
        let xb_out = apply_channel(&s, &quad(&alg, 1, Quadrature::X)).unwrap();
        let want = quad(&alg, 1, Quadrature::X)
            .try_add(&quad(&alg, 0, Quadrature::X).scaled(g))
            .unwrap();
        assert_eq!(xb_out, want);

        let u = LinearObservable::new(DVector::from_vec(vec![0.3, -1.0, 2.0, 0.5]), 1.5);
        assert_eq!(apply_channel(&LinearChannel::identity(&alg), &u).unwrap(), u);
    }

    #[test]
    fn amplifier_channel_is_symplectic() {
        let alg = CanonicalAlgebra::new(2, 0.5).unwrap();
        let s = bae_channel_matrix(1.0);
        let omega = alg.form();
        // direct product oracle
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = 0.0;
                for k in 0..4 {
                    for l in 0..4 {
                        acc += s[(i, k)] * omega[(k, l)] * s[(j, l)];
                    }
                }
                worst = worst.max((acc - omega[(i, j)]).abs());
            }
        }
        assert_eq!(worst, 0.0);
    }

    #[test]
    fn bae_noise_and_disturbance_observables() {
        let g = 3.0;
        let model = bae_model(g).unwrap();
        let NdSystem::Gaussian(sys) = build_nd_system(&model, &Tolerances::default()).unwrap() else {
            panic!("gaussian model expected");
        };
        assert_eq!(sys.k[0].coeffs, DVector::from_vec(vec![0.0, 0.0, 1.0 / g, 0.0]));
        assert_eq!(sys.k[1].coeffs, DVector::from_vec(vec![0.0, 0.0, 0.0, -g]));
    }

    #[test]
    fn non_positive_gain_is_a_domain_error() {
        assert!(matches!(bae_model(0.0), Err(Error::Domain(_))));
        assert!(matches!(bae_model(-1.0), Err(Error::Domain(_))));
        assert!(matches!(bae_model(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn physicality_of_vacuum_reference_and_squeezed() {
        let alg = CanonicalAlgebra::new(1, 0.5).unwrap();
        let tol = Tolerances::default();
        let vac = physicality_check(&GaussianMoments::vacuum(&alg), &alg, &tol).unwrap();
        assert!(vac.is_psd);
        assert_abs_diff_eq!(vac.min_eigenvalue, 0.0, epsilon = 1e-15);

        // eigenvalues of [[1/4, 1/2 + i/4], [1/2 - i/4, 1/4]] are 1/4 ± √5/4
        let reference = physicality_check(&reference_probe_moments(), &alg, &tol).unwrap();
        assert!(!reference.is_psd);
        assert_abs_diff_eq!(reference.min_eigenvalue, (1.0 - 5f64.sqrt()) / 4.0, epsilon = 1e-12);

        for r in [-3.0_f64, -1.0, 0.0, 0.4, 2.5] {
            let cov = DMatrix::from_row_slice(2, 2, &[(-2.0 * r).exp() / 4.0, 0.0, 0.0, (2.0 * r).exp() / 4.0]);
            let mom = GaussianMoments::new(DVector::zeros(2), cov).unwrap();
            let v = physicality_check(&mom, &alg, &tol).unwrap();
            // closed form: (a + b)/2 - sqrt(((a - b)/2)^2 + 1/16), zero since ab = 1/16
            let (a, b) = ((-2.0 * r).exp() / 4.0, (2.0 * r).exp() / 4.0);
            let oracle = (a + b) / 2.0 - (((a - b) / 2.0).powi(2) + 1.0 / 16.0).sqrt();
            assert!(v.is_psd, "r = {r}");
            assert!((v.min_eigenvalue - oracle).abs() < 1e-10 * v.scale);
        }
    }

    #[test]
    fn channel_validation() {
        let alg = CanonicalAlgebra::new(1, 0.5).unwrap();
        let scaling = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        assert!(matches!(
            LinearChannel::new(scaling, &alg, 1e-10),
            Err(Error::ContractViolation { .. })
        ));
        assert!(matches!(
            LinearChannel::new(DMatrix::identity(4, 4), &alg, 1e-10),
            Err(Error::Shape(_))
        ));
    }

    fn interleaved_random_channel(modes: usize, seed: u64, alg: &CanonicalAlgebra) -> LinearChannel {
        let s = random_symplectic(modes, seed).unwrap();
        LinearChannel::new(crate::symplectic::block_to_interleaved(s.matrix()), alg, 1e-10).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn channels_preserve_commutators(modes in 1usize..=3, seed in any::<u64>(), c in 0.1f64..2.0) {
            let alg = CanonicalAlgebra::new(modes, c).unwrap();
            let s = interleaved_random_channel(modes, seed, &alg);
            let mut rng = trial_rng(seed, 99);
            let u = LinearObservable::new(DVector::from_fn(alg.dim(), |_, _| rng.random_range(-1.0..1.0)), 0.0);
            let v = LinearObservable::new(DVector::from_fn(alg.dim(), |_, _| rng.random_range(-1.0..1.0)), 0.0);
            let before = lin_commutator(&u, &v, &alg).unwrap();
            let after = lin_commutator(&apply_channel(&s, &u).unwrap(), &apply_channel(&s, &v).unwrap(), &alg).unwrap();
            prop_assert!((before - after).norm() < 1e-10);
        }

        #[test]
        fn channel_composition(modes in 1usize..=3, seed in any::<u64>()) {
            let alg = CanonicalAlgebra::new(modes, 0.5).unwrap();
            let s1 = interleaved_random_channel(modes, seed, &alg);
            let s2 = interleaved_random_channel(modes, seed.wrapping_add(1), &alg);
            let mut rng = trial_rng(seed, 7);
            let u = LinearObservable::new(DVector::from_fn(alg.dim(), |_, _| rng.random_range(-1.0..1.0)), 0.25);
            let stepwise = apply_channel(&s2, &apply_channel(&s1, &u).unwrap()).unwrap();
            let composite = apply_channel(&s1.followed_by(&s2).unwrap(), &u).unwrap();
            prop_assert!((&stepwise.coeffs - &composite.coeffs).amax() < 1e-12);
            prop_assert_eq!(stepwise.offset, composite.offset);
        }

        #[test]
        fn sym_cov_is_bilinear_and_symmetric(seed in any::<u64>(), alpha in -2.0f64..2.0) {
            let mut rng = trial_rng(seed, 3);
            let g = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0));
            let mom = GaussianMoments::new(DVector::zeros(4), &g * g.transpose()).unwrap();
            let mut draw = || LinearObservable::new(DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0)), 0.0);
            let (u, v, w) = (draw(), draw(), draw());
            let uv = moment_sym_cov(&u, &v, &mom).unwrap();
            prop_assert!((uv - moment_sym_cov(&v, &u, &mom).unwrap()).abs() < 1e-12);
            let combo = u.scaled(alpha).try_add(&w).unwrap();
            let lhs = moment_sym_cov(&combo, &v, &mom).unwrap();
            let rhs = alpha * uv + moment_sym_cov(&w, &v, &mom).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
