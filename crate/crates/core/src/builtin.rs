//! Built-in example models and the parameter sweep.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::bae_model;
use crate::measurement::{analyze, FiniteModel, MeasurementModel};
use crate::operators::{CVector, Operator, QuantumState};
use crate::tolerance::Tolerances;

pub const EXAMPLE_NAMES: [&str; 3] = ["bae", "identity", "cnot"];

/// Gain of the amplifier example when none is given.
pub const DEFAULT_GAIN: f64 = 1.0;

/// Qubit object and probe with `U = I`, `A = M = σ_z`, `B = σ_x`, both in |0⟩.
pub fn identity_model() -> Result<MeasurementModel> {
    let model = FiniteModel {
        object_state: QuantumState::basis(2, 0)?,
        probe_state: QuantumState::basis(2, 0)?,
        a: vec![Operator::pauli_z()],
        b: vec![Operator::pauli_x()],
        m: vec![Operator::pauli_z()],
        interaction: Operator::identity(4),
    };
    MeasurementModel::finite(Some("identity".into()), model, &Tolerances::default())
}

/// `(|0⟩ + i|1⟩)/√2`, the object state of the CNOT example.
pub fn cnot_object_state() -> QuantumState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    QuantumState::Pure(CVector::from_vec(vec![
        num_complex::Complex64::new(s, 0.0),
        num_complex::Complex64::new(0.0, s),
    ]))
}

/// CNOT with the object as control, probe in |0⟩, `A = M = σ_z`, `B = σ_x`.
pub fn cnot_model() -> Result<MeasurementModel> {
    cnot_model_with(cnot_object_state())
}

pub fn cnot_model_with(object_state: QuantumState) -> Result<MeasurementModel> {
    let model = FiniteModel {
        object_state,
        probe_state: QuantumState::basis(2, 0)?,
        a: vec![Operator::pauli_z()],
        b: vec![Operator::pauli_x()],
        m: vec![Operator::pauli_z()],
        interaction: Operator::cnot(),
    };
    MeasurementModel::finite(Some("cnot".into()), model, &Tolerances::default())
}

/// Materializes a named example. Only `bae` takes a gain.
pub fn example(name: &str, gain: Option<f64>) -> Result<MeasurementModel> {
    match (name, gain) {
        ("bae", g) => bae_model(g.unwrap_or(DEFAULT_GAIN)),
        ("identity" | "cnot", Some(_)) => Err(Error::Domain(format!("example `{name}` takes no gain"))),
        ("identity", None) => identity_model(),
        ("cnot", None) => cnot_model(),
        _ => Err(Error::Domain(format!(
            "unknown example `{name}`; available: {}",
            EXAMPLE_NAMES.join(", ")
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub gain: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub product: f64,
    pub min_eigenvalue: f64,
    pub determinant: f64,
    pub matrix_holds: bool,
    pub heisenberg_holds: bool,
    pub ozawa_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepDocument {
    pub example: String,
    pub param: String,
    pub rows: Vec<SweepRow>,
}

impl SweepDocument {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.matrix_holds)
    }
}

/// `steps` evenly spaced values from `min` to `max` inclusive; one value is `min`.
pub fn sweep_points(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::Domain("sweep needs at least one step".into()));
    }
    if !(min.is_finite() && max.is_finite()) || min > max {
        return Err(Error::Domain(format!("empty sweep range {min}..{max}")));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    let span = max - min;
    Ok((0..steps)
        .map(|k| {
            if k + 1 == steps {
                max
            } else {
                min + span * k as f64 / (steps - 1) as f64
            }
        })
        .collect())
}

pub fn sweep(name: &str, param: &str, min: f64, max: f64, steps: usize, tol: &Tolerances) -> Result<SweepDocument> {
    if name != "bae" {
        return Err(Error::Domain(format!("example `{name}` has no sweepable parameter")));
    }
    if param != "gain" {
        return Err(Error::Domain(format!(
            "unknown parameter `{param}` for `bae`; available: gain"
        )));
    }
    let rows = sweep_points(min, max, steps)?
        .into_iter()
        .map(|gain| {
            let report = analyze(&bae_model(gain)?, tol)?;
            let pair = report.pairs[0];
            Ok(SweepRow {
                gain,
                epsilon: report.epsilon[0],
                eta: report.eta[0],
                product: report.epsilon[0] * report.eta[0],
                min_eigenvalue: report.matrix_oup.min_eigenvalue,
                determinant: report.matrix_oup.determinant,
                matrix_holds: report.matrix_oup.is_psd,
                heisenberg_holds: pair.heisenberg.holds,
                ozawa_holds: pair.ozawa.holds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepDocument {
        example: name.into(),
        param: param.into(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unknown_example_lists_names() {
        let err = example("nope", None).unwrap_err().to_string();
        assert!(err.contains("bae, identity, cnot"), "{err}");
        assert!(example("cnot", Some(2.0)).is_err());
        assert!(matches!(example("bae", Some(0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn bae_sweep_saturates_everywhere() {
        let doc = sweep("bae", "gain", 0.5, 4.0, 8, &Tolerances::default()).unwrap();
        assert_eq!(doc.rows.len(), 8);
        assert_eq!(doc.rows[7].gain, 4.0);
        for row in &doc.rows {
            assert_abs_diff_eq!(row.product, 0.25, epsilon = 1e-12);
            assert!(row.min_eigenvalue < 0.0);
            // 2×2 oracle: eigenvalues of [[a, b+i/4], [b−i/4, d]]
            let (a, d, b) = (1.0 / (4.0 * row.gain.powi(2)), row.gain.powi(2) / 4.0, -0.5_f64);
            let off = (b * b + 1.0 / 16.0).sqrt();
            let min = (a + d) / 2.0 - (((a - d) / 2.0).powi(2) + off * off).sqrt();
            assert_abs_diff_eq!(row.min_eigenvalue, min, epsilon = 1e-12);
        }
        assert!(!doc.all_hold());
    }

    #[test]
    fn single_step_matches_example() {
        let doc = sweep("bae", "gain", 2.0, 3.0, 1, &Tolerances::default()).unwrap();
        let report = analyze(&example("bae", Some(2.0)).unwrap(), &Tolerances::default()).unwrap();
        assert_eq!(doc.rows.len(), 1);
        assert_eq!(doc.rows[0].epsilon, report.epsilon[0]);
        assert_eq!(doc.rows[0].min_eigenvalue, report.matrix_oup.min_eigenvalue);
    }

    #[test]
    fn empty_ranges_are_rejected() {
        assert!(sweep_points(2.0, 1.0, 3).is_err());
        assert!(sweep_points(1.0, 2.0, 0).is_err());
        assert!(sweep("cnot", "gain", 1.0, 2.0, 2, &Tolerances::default()).is_err());
    }
}
