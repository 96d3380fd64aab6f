//! Seeded fuzz campaigns over random physical measurement models.
//!
//! Each trial draws from its own generator stream, trials run in parallel and
//! results are merged in trial order, so a summary depends only on the
//! configuration and seed.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{
    bae_model, CanonicalAlgebra, GaussianMoments, LinearChannel, LinearObservable, Quadrature, QUADRATURE_COMM,
};
use crate::measurement::{
    analyze, analyze_system, build_nd_system, derivation_identity_check, FiniteModel, GaussianModel, MeasurementModel,
    UncertaintyReport,
};
use crate::model::ModelFile;
use crate::operators::{CVector, Operator, OperatorRole, QuantumState};
use crate::random::{haar_unitary, random_commuting_family, random_pure_state, trial_rng};
use crate::symplectic::{block_to_interleaved, random_symplectic};
use crate::tolerance::Tolerances;

/// Relative matrix margin below which a trial counts as near-saturating.
pub const NEAR_SATURATION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "backend", rename_all = "snake_case")]
pub enum FuzzBackend {
    Finite {
        object_dim: usize,
        probe_dim: usize,
    },
    /// `modes` object modes and as many probe modes.
    Gaussian {
        modes: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FuzzConfig {
    #[serde(flatten)]
    pub backend: FuzzBackend,
    pub trials: usize,
    pub seed: u64,
    /// Random `λ` vectors per trial for the commutator identity.
    pub probes_per_trial: usize,
    pub tolerances: Tolerances,
}

impl FuzzConfig {
    pub fn new(backend: FuzzBackend, trials: usize, seed: u64) -> Self {
        Self {
            backend,
            trials,
            seed,
            probes_per_trial: 16,
            tolerances: Tolerances::default(),
        }
    }
}

/// Random finite model: Haar interaction, random pure states, and `n`
/// commuting observables per family.
pub fn random_finite_model<R: Rng + ?Sized>(
    object_dim: usize,
    probe_dim: usize,
    n: usize,
    rng: &mut R,
) -> Result<MeasurementModel> {
    if object_dim < 2 || probe_dim < 2 || n == 0 {
        return Err(Error::Domain(format!(
            "random finite models need dimensions ≥ 2 and n ≥ 1, got {object_dim}x{probe_dim}, n = {n}"
        )));
    }
    let herm = |m| Operator::from_trusted(m, OperatorRole::Hermitian);
    let a = random_commuting_family(object_dim, n, rng)
        .into_iter()
        .map(herm)
        .collect();
    let b = random_commuting_family(object_dim, n, rng)
        .into_iter()
        .map(herm)
        .collect();
    let m = random_commuting_family(probe_dim, n, rng)
        .into_iter()
        .map(herm)
        .collect();
    let interaction = Operator::from_trusted(haar_unitary(object_dim * probe_dim, rng), OperatorRole::Unitary);
    let model = FiniteModel {
        object_state: QuantumState::Pure(random_pure_state(object_dim, rng)),
        probe_state: QuantumState::Pure(random_pure_state(probe_dim, rng)),
        a,
        b,
        m,
        interaction,
    };
    MeasurementModel::finite(None, model, &Tolerances::default())
}

/// Physical Gaussian moments: a random symplectic image of a thermal state.
fn random_physical_moments<R: Rng + ?Sized>(modes: usize, c: f64, rng: &mut R) -> Result<GaussianMoments> {
    let s = block_to_interleaved(random_symplectic(modes, rng.random())?.matrix());
    let mut thermal = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        let nu = c / 2.0 * (1.0 + rng.random_range(0.0..2.0));
        thermal[(2 * k, 2 * k)] = nu;
        thermal[(2 * k + 1, 2 * k + 1)] = nu;
    }
    let cov = &s * thermal * s.transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    let mean = DVector::from_fn(2 * modes, |_, _| rng.random_range(-1.0..1.0));
    GaussianMoments::new(mean, cov)
}

/// Random Gaussian model on `modes` object and `modes` probe modes:
/// `A_i = X_i`, `B_i = Y_i`, meters are random combinations of probe `X`s,
/// random symplectic channel and random physical moments.
pub fn random_gaussian_model<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> Result<MeasurementModel> {
    if modes == 0 {
        return Err(Error::Domain("random Gaussian models need at least one mode".into()));
    }
    let c = QUADRATURE_COMM;
    let alg = CanonicalAlgebra::new(2 * modes, c)?;
    let a = (0..modes)
        .map(|k| alg.quadrature(k, Quadrature::X))
        .collect::<Result<Vec<_>>>()?;
    let b = (0..modes)
        .map(|k| alg.quadrature(k, Quadrature::Y))
        .collect::<Result<Vec<_>>>()?;
    let probe_x = (0..modes)
        .map(|k| alg.quadrature(modes + k, Quadrature::X))
        .collect::<Result<Vec<_>>>()?;
    let m = (0..modes)
        .map(|_| {
            probe_x.iter().try_fold(LinearObservable::zero(alg.dim()), |acc, x| {
                acc.try_add(&x.scaled(rng.random_range(-2.0..2.0)))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let s = block_to_interleaved(random_symplectic(2 * modes, rng.random())?.matrix());
    let model = GaussianModel {
        algebra: alg,
        object_modes: modes,
        object: random_physical_moments(modes, c, rng)?,
        probe: random_physical_moments(modes, c, rng)?,
        a,
        b,
        m,
        channel: LinearChannel::new(s, &alg, 1e-9)?,
    };
    MeasurementModel::gaussian(None, model, &Tolerances::default())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub min_eigenvalue: f64,
    pub relative_margin: f64,
    pub matrix_holds: bool,
    /// Smallest `lhs − rhs` over pairs for the scalar Ozawa relation.
    pub ozawa_slack: f64,
    pub heisenberg_violated: bool,
    pub determinant_chain_holds: bool,
    pub identity_residual: f64,
    pub out_commutator_residual: f64,
    pub model: ModelFile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualStats {
    pub max: f64,
    pub mean: f64,
}

/// The reference amplifier point, evaluated beside the random Gaussian trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferencePoint {
    pub physical: bool,
    pub probe_min_eigenvalue: f64,
    pub product: f64,
    pub heisenberg_saturated: bool,
    pub matrix_holds: bool,
    pub min_eigenvalue: f64,
    pub determinant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzSummary {
    pub config: FuzzConfig,
    pub physical_violations: usize,
    /// Trials where the matrix inequality failed. Any entry is a finding.
    pub violations: Vec<TrialRecord>,
    /// Matrix margin below [`NEAR_SATURATION`] while scalar Ozawa has slack.
    pub near_saturation: usize,
    /// Trials violating the naive Heisenberg product bound.
    pub heisenberg_violations: usize,
    pub determinant_chain_failures: usize,
    pub identity_residual: ResidualStats,
    pub out_commutator_residual: ResidualStats,
    /// Trial with the smallest relative matrix margin.
    pub tightest: Option<TrialRecord>,
    pub reference: Option<ReferencePoint>,
}

impl FuzzSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summaries always serialize")
    }
}

fn evaluate(model: MeasurementModel, trial: usize, config: &FuzzConfig, rng: &mut impl Rng) -> Result<TrialRecord> {
    let tol = &config.tolerances;
    let sys = build_nd_system(&model, tol)?;
    let report = analyze_system(&model, &sys, tol)?;
    let dim = 2 * report.n;
    let probes: Vec<CVector> = (0..config.probes_per_trial)
        .map(|_| random_pure_state(dim, rng))
        .collect();
    let derivation = derivation_identity_check(&sys, &report, &probes, tol.psd)?;
    Ok(record(trial, &report, derivation.max_identity_residual, model))
}

fn record(trial: usize, report: &UncertaintyReport, identity_residual: f64, model: MeasurementModel) -> TrialRecord {
    let v = &report.matrix_oup;
    TrialRecord {
        trial,
        min_eigenvalue: v.min_eigenvalue,
        relative_margin: v.relative_margin(),
        matrix_holds: v.is_psd,
        ozawa_slack: report
            .pairs
            .iter()
            .map(|p| p.ozawa.margin())
            .fold(f64::INFINITY, f64::min),
        heisenberg_violated: report.pairs.iter().any(|p| !p.heisenberg.holds),
        determinant_chain_holds: report
            .pairs
            .iter()
            .all(|p| p.determinant_chain.reverse_triangle_bound.holds && p.determinant_chain.difference_bound.holds),
        identity_residual,
        out_commutator_residual: report.diagnostics.out_commutator_residual,
        model: ModelFile::from_model(&model, None, None),
    }
}

fn stats(values: impl Iterator<Item = f64> + Clone) -> ResidualStats {
    let count = values.clone().count().max(1) as f64;
    ResidualStats {
        max: values.clone().fold(0.0, f64::max),
        mean: values.sum::<f64>() / count,
    }
}

fn reference_point(tol: &Tolerances) -> Result<ReferencePoint> {
    let report = analyze(&bae_model(1.0)?, tol)?;
    let phys = report
        .moments_physicality
        .as_ref()
        .expect("gaussian reports carry physicality");
    let pair = report.pairs[0];
    Ok(ReferencePoint {
        physical: phys.object.is_psd && phys.probe.is_psd,
        probe_min_eigenvalue: phys.probe.min_eigenvalue,
        product: report.epsilon[0] * report.eta[0],
        heisenberg_saturated: pair.heisenberg.saturated,
        matrix_holds: report.matrix_oup.is_psd,
        min_eigenvalue: report.matrix_oup.min_eigenvalue,
        determinant: report.matrix_oup.determinant,
    })
}

/// Runs one campaign.
pub fn run(config: &FuzzConfig) -> Result<FuzzSummary> {
    if config.trials == 0 {
        return Err(Error::Domain("fuzz needs at least one trial".into()));
    }
    match config.backend {
        FuzzBackend::Finite { object_dim, probe_dim } => {
            if object_dim < 2 || probe_dim < 2 {
                return Err(Error::Domain(format!(
                    "finite fuzzing needs dimensions ≥ 2, got {object_dim}x{probe_dim}"
                )));
            }
            let dim = object_dim.saturating_mul(probe_dim);
            if dim > config.tolerances.max_dim {
                return Err(Error::ModelTooLarge {
                    dim,
                    max: config.tolerances.max_dim,
                });
            }
        }
        FuzzBackend::Gaussian { modes: 0 } => {
            return Err(Error::Domain("gaussian fuzzing needs at least one mode".into()))
        }
        FuzzBackend::Gaussian { .. } => {}
    }
    let records = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(config.seed, trial as u64);
            let model = match config.backend {
                FuzzBackend::Finite { object_dim, probe_dim } => {
                    let n = if object_dim.min(probe_dim) >= 2 && rng.random_bool(0.5) {
                        2
                    } else {
                        1
                    };
                    random_finite_model(object_dim, probe_dim, n, &mut rng)?
                }
                FuzzBackend::Gaussian { modes } => random_gaussian_model(modes, &mut rng)?,
            };
            evaluate(model, trial, config, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;

    let violations: Vec<TrialRecord> = records.iter().filter(|r| !r.matrix_holds).cloned().collect();
    let tightest = records
        .iter()
        .min_by(|a, b| {
            a.relative_margin
                .total_cmp(&b.relative_margin)
                .then(a.trial.cmp(&b.trial))
        })
        .cloned();
    let reference = match config.backend {
        FuzzBackend::Gaussian { .. } => Some(reference_point(&config.tolerances)?),
        FuzzBackend::Finite { .. } => None,
    };
    Ok(FuzzSummary {
        config: *config,
        physical_violations: violations.len(),
        near_saturation: records
            .iter()
            .filter(|r| r.relative_margin.abs() < NEAR_SATURATION && r.ozawa_slack > NEAR_SATURATION)
            .count(),
        heisenberg_violations: records.iter().filter(|r| r.heisenberg_violated).count(),
        determinant_chain_failures: records
            .iter()
            .filter(|r| r.matrix_holds && !r.determinant_chain_holds)
            .count(),
        identity_residual: stats(records.iter().map(|r| r.identity_residual)),
        out_commutator_residual: stats(records.iter().map(|r| r.out_commutator_residual)),
        violations,
        tightest,
        reference,
    })
}
