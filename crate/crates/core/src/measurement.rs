//! Measurement models, noise and disturbance operators, and the inequality
//! report.
//!
//! For in-observables `Z_in = (A_1..A_n, B_1..B_n)` and out-observables
//! `Z_out = (M_1^out..M_n^out, B_1^out..B_n^out)` the noise-disturbance vector
//! is `K = Z_out − Z_in = (N_1..N_n, D_1..D_n)`. From it the report assembles
//!
//! * `K_αβ = ⟨(ΔK_α ΔK_β + ΔK_β ΔK_α)/2⟩` (symmetrized covariance),
//! * `Γ_αβ = −i ⟨[Z_in_α, K_β] + [K_α, Z_in_β]⟩`,
//! * `𝒢_αβ = −i ⟨[Z_in_α, Z_in_β]⟩`,
//!
//! and certifies `K + (i/2)(Γ + 𝒢) ⪰ 0` alongside the scalar relations.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{
    apply_channel, lin_commutator, moment_expectation, moment_sym_cov, physicality_check, CanonicalAlgebra,
    GaussianMoments, LinearChannel, LinearObservable,
};
use crate::operators::{
    self, commutator, embed_object, embed_probe, expectation, heisenberg_out, max_modulus, real_expectation, CMatrix,
    CVector, Operator, PsdVerdict, QuantumState,
};
use crate::serial;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteModel {
    pub object_state: QuantumState,
    pub probe_state: QuantumState,
    pub a: Vec<Operator>,
    pub b: Vec<Operator>,
    pub m: Vec<Operator>,
    /// Unitary on object ⊗ probe.
    pub interaction: Operator,
}

impl FiniteModel {
    pub fn object_dim(&self) -> usize {
        self.object_state.dim()
    }

    pub fn probe_dim(&self) -> usize {
        self.probe_state.dim()
    }
}

/// Moment-level model. Observables are forms over the composite canonical
/// vector, object modes first.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianModel {
    pub algebra: CanonicalAlgebra,
    pub object_modes: usize,
    pub object: GaussianMoments,
    pub probe: GaussianMoments,
    pub a: Vec<LinearObservable>,
    pub b: Vec<LinearObservable>,
    pub m: Vec<LinearObservable>,
    pub channel: LinearChannel,
}

impl GaussianModel {
    pub fn probe_modes(&self) -> usize {
        self.algebra.modes() - self.object_modes
    }

    pub fn composite_moments(&self) -> GaussianMoments {
        self.object.direct_sum(&self.probe)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    Finite(FiniteModel),
    Gaussian(GaussianModel),
}

/// A validated object + probe measurement model.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementModel {
    name: Option<String>,
    backend: Backend,
}

fn commutation_residual(a: &Operator, b: &Operator) -> Result<f64> {
    let scale = (max_modulus(a.matrix()) * max_modulus(b.matrix())).max(f64::MIN_POSITIVE);
    Ok(max_modulus(commutator(a, b)?.matrix()) / scale)
}

fn check_family_commutes(ops: &[Operator], label: &str, tol: f64) -> Result<()> {
    for i in 0..ops.len() {
        for j in i + 1..ops.len() {
            let residual = commutation_residual(&ops[i], &ops[j])?;
            if residual > tol {
                return Err(Error::ModelInvalid {
                    what: format!("{label}[{i}] and {label}[{j}] do not commute"),
                    residual,
                });
            }
        }
    }
    Ok(())
}

fn check_lin_family_commutes(obs: &[LinearObservable], label: &str, alg: &CanonicalAlgebra, tol: f64) -> Result<()> {
    for i in 0..obs.len() {
        for j in i + 1..obs.len() {
            let scale = (obs[i].coeffs.amax() * obs[j].coeffs.amax() * alg.comm_constant()).max(f64::MIN_POSITIVE);
            let residual = lin_commutator(&obs[i], &obs[j], alg)?.norm() / scale;
            if residual > tol {
                return Err(Error::ModelInvalid {
                    what: format!("{label}[{i}] and {label}[{j}] do not commute"),
                    residual,
                });
            }
        }
    }
    Ok(())
}

fn check_count<T>(items: &[T], n: usize, label: &str) -> Result<()> {
    if items.len() != n {
        return Err(Error::Shape(format!(
            "expected {n} observables in `{label}`, got {}",
            items.len()
        )));
    }
    Ok(())
}

impl MeasurementModel {
    pub fn finite(name: Option<String>, model: FiniteModel, tol: &Tolerances) -> Result<Self> {
        let n = model.a.len();
        if n == 0 {
            return Err(Error::Shape("a model needs at least one observable pair".into()));
        }
        check_count(&model.b, n, "b")?;
        check_count(&model.m, n, "m")?;
        let (od, pd) = (model.object_dim(), model.probe_dim());
        let dim = od.saturating_mul(pd);
        if dim > tol.max_dim {
            return Err(Error::ModelTooLarge { dim, max: tol.max_dim });
        }
        for (label, ops, want) in [("a", &model.a, od), ("b", &model.b, od), ("m", &model.m, pd)] {
            for (i, op) in ops.iter().enumerate() {
                if op.dim() != want {
                    return Err(Error::Shape(format!(
                        "{label}[{i}] has dimension {}, expected {want}",
                        op.dim()
                    )));
                }
                let residual = operators::hermitian_residual(op.matrix());
                if residual > tol.hermitian {
                    return Err(Error::ContractViolation {
                        what: format!("{label}[{i}] is not Hermitian"),
                        residual,
                    });
                }
            }
        }
        if model.interaction.dim() != dim {
            return Err(Error::Shape(format!(
                "interaction has dimension {}, expected {dim}",
                model.interaction.dim()
            )));
        }
        let residual = operators::unitary_residual(model.interaction.matrix());
        if residual > tol.unitary {
            return Err(Error::ContractViolation {
                what: "interaction is not unitary".into(),
                residual,
            });
        }
        check_family_commutes(&model.a, "a", tol.hermitian)?;
        check_family_commutes(&model.b, "b", tol.hermitian)?;
        check_family_commutes(&model.m, "m", tol.hermitian)?;
        Ok(Self {
            name,
            backend: Backend::Finite(model),
        })
    }

    pub fn gaussian(name: Option<String>, model: GaussianModel, tol: &Tolerances) -> Result<Self> {
        let n = model.a.len();
        if n == 0 {
            return Err(Error::Shape("a model needs at least one observable pair".into()));
        }
        check_count(&model.b, n, "b")?;
        check_count(&model.m, n, "m")?;
        let alg = &model.algebra;
        if model.object_modes == 0 || model.object_modes >= alg.modes() {
            return Err(Error::Shape(format!(
                "object modes must be between 1 and {}, got {}",
                alg.modes() - 1,
                model.object_modes
            )));
        }
        if model.object.modes() != model.object_modes || model.probe.modes() != model.probe_modes() {
            return Err(Error::Shape(format!(
                "moments cover {} object and {} probe modes, expected {} and {}",
                model.object.modes(),
                model.probe.modes(),
                model.object_modes,
                model.probe_modes()
            )));
        }
        if model.channel.dim() != alg.dim() {
            return Err(Error::Shape(format!(
                "channel is {0}x{0}, expected {1}x{1}",
                model.channel.dim(),
                alg.dim()
            )));
        }
        let split = 2 * model.object_modes;
        for (label, obs, on_object) in [("a", &model.a, true), ("b", &model.b, true), ("m", &model.m, false)] {
            for (i, u) in obs.iter().enumerate() {
                if u.len() != alg.dim() {
                    return Err(Error::Shape(format!(
                        "{label}[{i}] has {} coefficients, expected {}",
                        u.len(),
                        alg.dim()
                    )));
                }
                let foreign = if on_object {
                    u.coeffs.rows(split, alg.dim() - split).amax()
                } else {
                    u.coeffs.rows(0, split).amax()
                };
                if foreign != 0.0 {
                    let side = if on_object { "probe" } else { "object" };
                    return Err(Error::ModelInvalid {
                        what: format!("{label}[{i}] acts on {side} modes"),
                        residual: foreign,
                    });
                }
            }
        }
        check_lin_family_commutes(&model.a, "a", alg, tol.hermitian)?;
        check_lin_family_commutes(&model.b, "b", alg, tol.hermitian)?;
        check_lin_family_commutes(&model.m, "m", alg, tol.hermitian)?;
        Ok(Self {
            name,
            backend: Backend::Gaussian(model),
        })
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn backend_name(&self) -> &'static str {
        match self.backend {
            Backend::Finite(_) => "finite",
            Backend::Gaussian(_) => "gaussian",
        }
    }

    /// Number of observable pairs.
    pub fn n(&self) -> usize {
        match &self.backend {
            Backend::Finite(f) => f.a.len(),
            Backend::Gaussian(g) => g.a.len(),
        }
    }
}

/// Finite-backend collective observables on the composite space.
#[derive(Debug, Clone)]
pub struct FiniteNd {
    pub state: QuantumState,
    pub z_in: Vec<Operator>,
    pub z_out: Vec<Operator>,
    pub k: Vec<Operator>,
}

#[derive(Debug, Clone)]
pub struct GaussianNd {
    pub algebra: CanonicalAlgebra,
    pub moments: GaussianMoments,
    pub z_in: Vec<LinearObservable>,
    pub z_out: Vec<LinearObservable>,
    pub k: Vec<LinearObservable>,
}

#[derive(Debug, Clone)]
pub enum NdSystem {
    Finite(FiniteNd),
    Gaussian(GaussianNd),
}

impl NdSystem {
    pub fn n(&self) -> usize {
        match self {
            Self::Finite(f) => f.k.len() / 2,
            Self::Gaussian(g) => g.k.len() / 2,
        }
    }
}

/// Builds `Z_in`, `Z_out` and `K = Z_out − Z_in` and checks that the outputs
/// commute pairwise.
pub fn build_nd_system(model: &MeasurementModel, tol: &Tolerances) -> Result<NdSystem> {
    let system = match &model.backend {
        Backend::Finite(f) => {
            let (od, pd) = (f.object_dim(), f.probe_dim());
            let state = f.object_state.product(&f.probe_state, tol.max_dim)?;
            let a_in =
                f.a.iter()
                    .map(|a| embed_object(a, pd, tol.max_dim))
                    .collect::<Result<Vec<_>>>()?;
            let b_in =
                f.b.iter()
                    .map(|b| embed_object(b, pd, tol.max_dim))
                    .collect::<Result<Vec<_>>>()?;
            let m_in =
                f.m.iter()
                    .map(|m| embed_probe(m, od, tol.max_dim))
                    .collect::<Result<Vec<_>>>()?;
            let m_out = m_in
                .iter()
                .map(|m| heisenberg_out(&f.interaction, m, tol))
                .collect::<Result<Vec<_>>>()?;
            let b_out = b_in
                .iter()
                .map(|b| heisenberg_out(&f.interaction, b, tol))
                .collect::<Result<Vec<_>>>()?;
            let z_in: Vec<Operator> = a_in.into_iter().chain(b_in).collect();
            let z_out: Vec<Operator> = m_out.into_iter().chain(b_out).collect();
            let k = z_out.iter().zip(&z_in).map(|(o, i)| o - i).collect();
            NdSystem::Finite(FiniteNd { state, z_in, z_out, k })
        }
        Backend::Gaussian(g) => {
            let moments = g.composite_moments();
            let m_out =
                g.m.iter()
                    .map(|m| apply_channel(&g.channel, m))
                    .collect::<Result<Vec<_>>>()?;
            let b_out =
                g.b.iter()
                    .map(|b| apply_channel(&g.channel, b))
                    .collect::<Result<Vec<_>>>()?;
            let z_in: Vec<LinearObservable> = g.a.iter().chain(&g.b).cloned().collect();
            let z_out: Vec<LinearObservable> = m_out.into_iter().chain(b_out).collect();
            let k = z_out
                .iter()
                .zip(&z_in)
                .map(|(o, i)| o.try_sub(i))
                .collect::<Result<Vec<_>>>()?;
            NdSystem::Gaussian(GaussianNd {
                algebra: g.algebra,
                moments,
                z_in,
                z_out,
                k,
            })
        }
    };
    let (residual, pair) = out_commutator_residual(&system)?;
    if residual > tol.hermitian {
        return Err(Error::ModelInvalid {
            what: format!("output observables {} and {} do not commute", pair.0, pair.1),
            residual,
        });
    }
    Ok(system)
}

/// Largest relative `‖[Z_out_α, Z_out_β]‖` and the pair attaining it.
pub fn out_commutator_residual(system: &NdSystem) -> Result<(f64, (usize, usize))> {
    let mut worst = (0.0, (0, 0));
    match system {
        NdSystem::Finite(f) => {
            for a in 0..f.z_out.len() {
                for b in a + 1..f.z_out.len() {
                    let r = commutation_residual(&f.z_out[a], &f.z_out[b])?;
                    if r > worst.0 {
                        worst = (r, (a, b));
                    }
                }
            }
        }
        NdSystem::Gaussian(g) => {
            for a in 0..g.z_out.len() {
                for b in a + 1..g.z_out.len() {
                    let scale = (g.z_out[a].coeffs.amax() * g.z_out[b].coeffs.amax() * g.algebra.comm_constant())
                        .max(f64::MIN_POSITIVE);
                    let r = lin_commutator(&g.z_out[a], &g.z_out[b], &g.algebra)?.norm() / scale;
                    if r > worst.0 {
                        worst = (r, (a, b));
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Second-order statistics of Hermitian observables in a fixed state.
trait MomentSource {
    type Obs;
    fn mean(&self, x: &Self::Obs) -> Result<f64>;
    fn sym_cov(&self, x: &Self::Obs, y: &Self::Obs) -> Result<f64>;
    /// `⟨[x, y]⟩`
    fn comm(&self, x: &Self::Obs, y: &Self::Obs) -> Result<Complex64>;
}

struct FiniteSource<'a> {
    state: &'a QuantumState,
    norm_tol: f64,
}

impl FiniteSource<'_> {
    fn centered_action(&self, x: &Operator, psi: &CVector) -> Result<CVector> {
        let mean = self.mean(x)?;
        Ok(x.matrix() * psi - psi * Complex64::new(mean, 0.0))
    }
}

impl MomentSource for FiniteSource<'_> {
    type Obs = Operator;

    fn mean(&self, x: &Operator) -> Result<f64> {
        real_expectation(x, self.state, self.norm_tol)
    }

    fn sym_cov(&self, x: &Operator, y: &Operator) -> Result<f64> {
        match self.state {
            QuantumState::Pure(psi) => {
                let dx = self.centered_action(x, psi)?;
                let dy = self.centered_action(y, psi)?;
                Ok(dx.dotc(&dy).re)
            }
            QuantumState::Density(_) => {
                let cx = operators::centered(x, self.state)?;
                let cy = operators::centered(y, self.state)?;
                Ok(expectation(&operators::sym_product(&cx, &cy)?, self.state)?.re)
            }
        }
    }

    fn comm(&self, x: &Operator, y: &Operator) -> Result<Complex64> {
        match self.state {
            QuantumState::Pure(psi) => {
                let xv = x.matrix() * psi;
                let yv = y.matrix() * psi;
                Ok(xv.dotc(&yv) - yv.dotc(&xv))
            }
            QuantumState::Density(_) => expectation(&commutator(x, y)?, self.state),
        }
    }
}

struct GaussianSource<'a> {
    algebra: &'a CanonicalAlgebra,
    moments: &'a GaussianMoments,
}

impl MomentSource for GaussianSource<'_> {
    type Obs = LinearObservable;

    fn mean(&self, x: &LinearObservable) -> Result<f64> {
        moment_expectation(x, self.moments)
    }

    fn sym_cov(&self, x: &LinearObservable, y: &LinearObservable) -> Result<f64> {
        moment_sym_cov(x, y, self.moments)
    }

    fn comm(&self, x: &LinearObservable, y: &LinearObservable) -> Result<Complex64> {
        lin_commutator(x, y, self.algebra)
    }
}

/// Raw matrices before symmetrization, with their residuals.
struct Assembled {
    k: DMatrix<f64>,
    gamma: DMatrix<f64>,
    gexp: DMatrix<f64>,
    z_cov: DMatrix<f64>,
    k_symmetry: f64,
    gamma_skew: f64,
    gexp_skew: f64,
    gamma_imag: f64,
    gexp_imag: f64,
}

fn assemble<S: MomentSource>(src: &S, z_in: &[S::Obs], k: &[S::Obs], tol: &Tolerances) -> Result<Assembled> {
    let dim = k.len();
    let mut kmat = DMatrix::zeros(dim, dim);
    let mut zcov = DMatrix::zeros(dim, dim);
    let mut gamma_c = DMatrix::<Complex64>::zeros(dim, dim);
    let mut gexp_c = DMatrix::<Complex64>::zeros(dim, dim);
    let minus_i = Complex64::new(0.0, -1.0);
    for a in 0..dim {
        for b in 0..dim {
            kmat[(a, b)] = src.sym_cov(&k[a], &k[b])?;
            zcov[(a, b)] = src.sym_cov(&z_in[a], &z_in[b])?;
            gamma_c[(a, b)] = (src.comm(&z_in[a], &k[b])? + src.comm(&k[a], &z_in[b])?) * minus_i;
            gexp_c[(a, b)] = src.comm(&z_in[a], &z_in[b])? * minus_i;
        }
    }
    let gamma_imag = gamma_c.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
    let gexp_imag = gexp_c.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
    let gamma = gamma_c.map(|z| z.re);
    let gexp = gexp_c.map(|z| z.re);
    let scale = gamma.amax().max(gexp.amax()).max(1.0);
    for (what, residual) in [
        ("cross-commutator matrix", gamma_imag),
        ("commutator expectation matrix", gexp_imag),
    ] {
        if residual > tol.norm * scale {
            return Err(Error::NumericalContamination {
                what: format!("{what} has imaginary entries"),
                residual,
            });
        }
    }
    Ok(Assembled {
        k_symmetry: (&kmat - kmat.transpose()).amax(),
        gamma_skew: (&gamma + gamma.transpose()).amax(),
        gexp_skew: (&gexp + gexp.transpose()).amax(),
        k: symmetrize(&kmat),
        gamma: antisymmetrize(&gamma),
        gexp: antisymmetrize(&gexp),
        z_cov: symmetrize(&zcov),
        gamma_imag,
        gexp_imag,
    })
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn antisymmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m - m.transpose()) * 0.5
}

/// Hermitian matrix `K + (i/2)(Γ + 𝒢)`.
pub fn oup_matrix(k: &DMatrix<f64>, gamma: &DMatrix<f64>, gexp: &DMatrix<f64>) -> CMatrix {
    DMatrix::from_fn(k.nrows(), k.ncols(), |r, c| {
        Complex64::new(k[(r, c)], 0.5 * (gamma[(r, c)] + gexp[(r, c)]))
    })
}

/// A scalar inequality `lhs ≥ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `|lhs − rhs|` within tolerance.
    pub saturated: bool,
}

impl ScalarCheck {
    /// Holds when `lhs ≥ rhs − tol·max(1, |lhs|, |rhs|)`.
    pub fn new(lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = tol * 1f64.max(lhs.abs()).max(rhs.abs());
        Self {
            lhs,
            rhs,
            holds: lhs >= rhs - slack,
            saturated: (lhs - rhs).abs() <= slack,
        }
    }

    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// Consequences of the 2×2 principal minor on `(N_i, D_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeterminantChain {
    /// `|⟨[A_i, D_j] + [N_i, B_j]⟩|`
    pub interaction_term: f64,
    /// `|⟨[A_i, B_j]⟩|`
    pub kinematic_term: f64,
    /// `⟨ΔN_i²⟩⟨ΔD_j²⟩ ≥ K_{N_i D_j}² + ¼|⟨[A_i, D_j] + [N_i, B_j] + [A_i, B_j]⟩|²`
    pub minor_bound: ScalarCheck,
    /// The same with the correlation term dropped.
    pub minor_bound_uncorrelated: ScalarCheck,
    /// `ε η ≥ ½ | interaction_term − kinematic_term |`
    pub reverse_triangle_bound: ScalarCheck,
    /// `ε η ≥ ½ kinematic_term − ½ interaction_term`
    pub difference_bound: ScalarCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairReport {
    pub i: usize,
    pub j: usize,
    /// `|⟨[A_i, B_j]⟩| / 2`
    pub commutator_bound: f64,
    /// `εη + εσ(B) + σ(A)η ≥ |⟨[A, B]⟩|/2`
    pub ozawa: ScalarCheck,
    /// `εη ≥ |⟨[A, B]⟩|/2`
    pub heisenberg: ScalarCheck,
    /// `σ(A)σ(B) ≥ |⟨[A, B]⟩|/2`
    pub robertson: ScalarCheck,
    pub determinant_chain: DeterminantChain,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentsPhysicality {
    pub object: PsdVerdict,
    pub probe: PsdVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub k_symmetry_residual: f64,
    pub gamma_skew_residual: f64,
    pub gexp_skew_residual: f64,
    pub gamma_imag_residual: f64,
    pub gexp_imag_residual: f64,
    /// Largest relative commutator between output observables.
    pub out_commutator_residual: f64,
    /// `max |Z_in + K − Z_out|`.
    pub decomposition_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncertaintyReport {
    pub backend: String,
    pub n: usize,
    #[serde(with = "serial::real_matrix")]
    pub k_matrix: DMatrix<f64>,
    #[serde(with = "serial::real_matrix")]
    pub gamma: DMatrix<f64>,
    #[serde(with = "serial::real_matrix")]
    pub gexp: DMatrix<f64>,
    /// Symmetrized covariance of the in-observables.
    #[serde(with = "serial::real_matrix")]
    pub z_covariance: DMatrix<f64>,
    #[serde(with = "serial::complex_matrix")]
    pub oup_matrix: CMatrix,
    /// `K + (i/2)(Γ + 𝒢) ⪰ 0`
    pub matrix_oup: PsdVerdict,
    /// `K + (i/2)𝒢 ⪰ 0`
    pub matrix_heisenberg: PsdVerdict,
    pub independent_intervention: bool,
    pub epsilon: Vec<f64>,
    pub eta: Vec<f64>,
    pub sigma_a: Vec<f64>,
    pub sigma_b: Vec<f64>,
    pub pairs: Vec<PairReport>,
    /// `Σ_Z + (i/2)𝒢 ⪰ 0` for the in-observables.
    pub rsup: PsdVerdict,
    pub moments_physicality: Option<MomentsPhysicality>,
    pub diagnostics: Diagnostics,
}

impl UncertaintyReport {
    /// The verdict that drives exit codes.
    pub fn matrix_holds(&self) -> bool {
        self.matrix_oup.is_psd
    }

    pub fn pair(&self, i: usize, j: usize) -> Option<&PairReport> {
        self.pairs.iter().find(|p| p.i == i && p.j == j)
    }
}

fn decomposition_residual(system: &NdSystem) -> f64 {
    match system {
        NdSystem::Finite(f) => f
            .z_in
            .iter()
            .zip(&f.k)
            .zip(&f.z_out)
            .map(|((zi, k), zo)| max_modulus(&(zi.matrix() + k.matrix() - zo.matrix())))
            .fold(0.0, f64::max),
        NdSystem::Gaussian(g) => g
            .z_in
            .iter()
            .zip(&g.k)
            .zip(&g.z_out)
            .map(|((zi, k), zo)| (&zi.coeffs + &k.coeffs - &zo.coeffs).amax())
            .fold(0.0, f64::max),
    }
}

fn assemble_system(system: &NdSystem, tol: &Tolerances) -> Result<Assembled> {
    match system {
        NdSystem::Finite(f) => assemble(
            &FiniteSource {
                state: &f.state,
                norm_tol: tol.norm,
            },
            &f.z_in,
            &f.k,
            tol,
        ),
        NdSystem::Gaussian(g) => assemble(
            &GaussianSource {
                algebra: &g.algebra,
                moments: &g.moments,
            },
            &g.z_in,
            &g.k,
            tol,
        ),
    }
}

/// Symmetrized noise-disturbance covariance `K`.
pub fn nd_covariance(system: &NdSystem, tol: &Tolerances) -> Result<DMatrix<f64>> {
    Ok(assemble_system(system, tol)?.k)
}

pub fn gamma_matrix(system: &NdSystem, tol: &Tolerances) -> Result<DMatrix<f64>> {
    Ok(assemble_system(system, tol)?.gamma)
}

pub fn g_matrix(system: &NdSystem, tol: &Tolerances) -> Result<DMatrix<f64>> {
    Ok(assemble_system(system, tol)?.gexp)
}

pub fn matrix_oup(k: &DMatrix<f64>, gamma: &DMatrix<f64>, gexp: &DMatrix<f64>, tol: &Tolerances) -> Result<PsdVerdict> {
    operators::psd_check_with(&oup_matrix(k, gamma, gexp), tol)
}

fn root(x: f64) -> f64 {
    x.max(0.0).sqrt()
}

fn pair_report(asm: &Assembled, n: usize, i: usize, j: usize, tol: f64) -> PairReport {
    let (p, q) = (i, n + j);
    let eps = root(asm.k[(p, p)]);
    let eta = root(asm.k[(q, q)]);
    let sa = root(asm.z_cov[(i, i)]);
    let sb = root(asm.z_cov[(q, q)]);
    let kinematic = asm.gexp[(p, q)].abs();
    let interaction = asm.gamma[(p, q)].abs();
    let combined = asm.gamma[(p, q)] + asm.gexp[(p, q)];
    let bound = kinematic / 2.0;
    let product = eps * eta;
    let nn_dd = asm.k[(p, p)] * asm.k[(q, q)];
    let nd = asm.k[(p, q)];
    PairReport {
        i,
        j,
        commutator_bound: bound,
        ozawa: ScalarCheck::new(product + eps * sb + sa * eta, bound, tol),
        heisenberg: ScalarCheck::new(product, bound, tol),
        robertson: ScalarCheck::new(sa * sb, bound, tol),
        determinant_chain: DeterminantChain {
            interaction_term: interaction,
            kinematic_term: kinematic,
            minor_bound: ScalarCheck::new(nn_dd, nd * nd + combined * combined / 4.0, tol),
            minor_bound_uncorrelated: ScalarCheck::new(nn_dd, combined * combined / 4.0, tol),
            reverse_triangle_bound: ScalarCheck::new(product, 0.5 * (interaction - kinematic).abs(), tol),
            difference_bound: ScalarCheck::new(product, 0.5 * kinematic - 0.5 * interaction, tol),
        },
    }
}

fn complex_from_parts(re: &DMatrix<f64>, im: &DMatrix<f64>) -> CMatrix {
    DMatrix::from_fn(re.nrows(), re.ncols(), |r, c| {
        Complex64::new(re[(r, c)], 0.5 * im[(r, c)])
    })
}

/// Evaluates every relation on the model's initial state.
pub fn analyze(model: &MeasurementModel, tol: &Tolerances) -> Result<UncertaintyReport> {
    let system = build_nd_system(model, tol)?;
    analyze_system(model, &system, tol)
}

pub fn analyze_system(model: &MeasurementModel, system: &NdSystem, tol: &Tolerances) -> Result<UncertaintyReport> {
    let n = system.n();
    let asm = assemble_system(system, tol)?;
    let oup = oup_matrix(&asm.k, &asm.gamma, &asm.gexp);
    let matrix_oup = operators::psd_check_with(&oup, tol)?;
    let matrix_heisenberg = operators::psd_check_with(&complex_from_parts(&asm.k, &asm.gexp), tol)?;
    let rsup = operators::psd_check_with(&complex_from_parts(&asm.z_cov, &asm.gexp), tol)?;
    let independent_intervention = asm.gamma.amax() <= tol.norm * asm.gexp.amax().max(1.0);

    let moments_physicality = match model.backend() {
        Backend::Gaussian(g) => {
            let c = g.algebra.comm_constant();
            Some(MomentsPhysicality {
                object: physicality_check(&g.object, &CanonicalAlgebra::new(g.object_modes, c)?, tol)?,
                probe: physicality_check(&g.probe, &CanonicalAlgebra::new(g.probe_modes(), c)?, tol)?,
            })
        }
        Backend::Finite(_) => None,
    };

    let pairs = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| pair_report(&asm, n, i, j, tol.psd))
        .collect();
    let (out_residual, _) = out_commutator_residual(system)?;

    Ok(UncertaintyReport {
        backend: model.backend_name().to_string(),
        n,
        epsilon: (0..n).map(|i| root(asm.k[(i, i)])).collect(),
        eta: (0..n).map(|j| root(asm.k[(n + j, n + j)])).collect(),
        sigma_a: (0..n).map(|i| root(asm.z_cov[(i, i)])).collect(),
        sigma_b: (0..n).map(|j| root(asm.z_cov[(n + j, n + j)])).collect(),
        pairs,
        oup_matrix: oup,
        matrix_oup,
        matrix_heisenberg,
        independent_intervention,
        rsup,
        moments_physicality,
        diagnostics: Diagnostics {
            k_symmetry_residual: asm.k_symmetry,
            gamma_skew_residual: asm.gamma_skew,
            gexp_skew_residual: asm.gexp_skew,
            gamma_imag_residual: asm.gamma_imag,
            gexp_imag_residual: asm.gexp_imag,
            out_commutator_residual: out_residual,
            decomposition_residual: decomposition_residual(system),
        },
        k_matrix: asm.k,
        gamma: asm.gamma,
        gexp: asm.gexp,
        z_covariance: asm.z_cov,
    })
}

/// Residuals of the commutator identity behind the matrix inequality, per
/// probe vector `λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivationReport {
    /// `max(|λ† O λ|, |λ† T λ|)` where `O_αβ = ⟨[ΔZ_out_α, ΔZ_out_β]⟩` and
    /// `T = i𝒢 + iΓ + ⟨[ΔK_α, ΔK_β]⟩`, both computed from explicit commutators.
    pub identity_residuals: Vec<f64>,
    /// `λ† (K + (i/2)(Γ + 𝒢)) λ / ‖λ‖²`.
    pub forms: Vec<f64>,
    pub max_identity_residual: f64,
    pub min_form: f64,
    /// Matrix verdict the forms were compared against.
    pub matrix_is_psd: bool,
    /// Whether every form is `≥ −tol·scale` when the matrix is PSD.
    pub forms_consistent: bool,
    #[serde(with = "serial::opt_complex_vector")]
    pub refuting_lambda: Option<CVector>,
    pub refuting_form: Option<f64>,
}

fn explicit_commutator_matrices(system: &NdSystem) -> Result<(CMatrix, CMatrix)> {
    let dim = 2 * system.n();
    let mut out = CMatrix::zeros(dim, dim);
    let mut kk = CMatrix::zeros(dim, dim);
    match system {
        NdSystem::Finite(f) => {
            for a in 0..dim {
                for b in 0..dim {
                    out[(a, b)] = expectation(&commutator(&f.z_out[a], &f.z_out[b])?, &f.state)?;
                    kk[(a, b)] = expectation(&commutator(&f.k[a], &f.k[b])?, &f.state)?;
                }
            }
        }
        NdSystem::Gaussian(g) => {
            for a in 0..dim {
                for b in 0..dim {
                    out[(a, b)] = lin_commutator(&g.z_out[a], &g.z_out[b], &g.algebra)?;
                    kk[(a, b)] = lin_commutator(&g.k[a], &g.k[b], &g.algebra)?;
                }
            }
        }
    }
    Ok((out, kk))
}

fn sandwich(m: &CMatrix, v: &CVector) -> Complex64 {
    v.dotc(&(m * v))
}

/// Checks the commutator identity and the sesquilinear form for every probe
/// vector. The form must be nonnegative whenever the matrix verdict is PSD;
/// otherwise the refuting eigenvector is reported.
pub fn derivation_identity_check(
    system: &NdSystem,
    report: &UncertaintyReport,
    probes: &[CVector],
    tol: f64,
) -> Result<DerivationReport> {
    let dim = 2 * system.n();
    let (out, kk) = explicit_commutator_matrices(system)?;
    let i = Complex64::new(0.0, 1.0);
    let t = DMatrix::from_fn(dim, dim, |r, c| {
        i * (report.gexp[(r, c)] + report.gamma[(r, c)]) + kk[(r, c)]
    });
    let mut identity_residuals = Vec::with_capacity(probes.len());
    let mut forms = Vec::with_capacity(probes.len());
    for (idx, lambda) in probes.iter().enumerate() {
        if lambda.len() != dim {
            return Err(Error::Shape(format!(
                "probe vector {idx} has length {}, expected {dim}",
                lambda.len()
            )));
        }
        let norm2 = lambda.norm_squared();
        if norm2 == 0.0 {
            return Err(Error::Domain(format!("probe vector {idx} is zero")));
        }
        identity_residuals.push(sandwich(&out, lambda).norm().max(sandwich(&t, lambda).norm()));
        forms.push(sandwich(&report.oup_matrix, lambda).re / norm2);
    }
    let verdict = &report.matrix_oup;
    let min_form = forms.iter().copied().fold(f64::INFINITY, f64::min);
    let forms_consistent = !verdict.is_psd || min_form >= -tol * verdict.scale;
    let (refuting_lambda, refuting_form) = match &verdict.refuting_vector {
        Some(w) => (
            Some(w.clone()),
            Some(sandwich(&report.oup_matrix, w).re / w.norm_squared()),
        ),
        None => (None, None),
    };
    Ok(DerivationReport {
        max_identity_residual: identity_residuals.iter().copied().fold(0.0, f64::max),
        identity_residuals,
        forms,
        min_form,
        matrix_is_psd: verdict.is_psd,
        forms_consistent,
        refuting_lambda,
        refuting_form,
    })
}
