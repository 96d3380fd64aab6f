//! Versioned JSON model files.
//!
//! Every file carries `"schema": 1` and a `"backend"` tag (`finite` or
//! `gaussian`). Complex scalars are `[re, im]` pairs and matrices are nested
//! row-major arrays. Errors name the offending field path.

use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gaussian::{CanonicalAlgebra, GaussianMoments, LinearChannel, LinearObservable};
use crate::measurement::{Backend, FiniteModel, GaussianModel, MeasurementModel};
use crate::operators::{hermitian_residual, CMatrix, CVector, Operator, QuantumState};
use crate::serial::{complex_entries, complex_rows, matrix_from_rows, pair_to_complex, real_rows};
use crate::tolerance::{ToleranceOverrides, Tolerances};

pub const SCHEMA_VERSION: u32 = 1;

type ComplexRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Pure(Vec<[f64; 2]>),
    Density(ComplexRows),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSystem {
    pub dim: usize,
    pub state: StateSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteFile {
    pub schema: u32,
    pub backend: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub object: FiniteSystem,
    pub probe: FiniteSystem,
    pub a: Vec<ComplexRows>,
    pub b: Vec<ComplexRows>,
    pub m: Vec<ComplexRows>,
    pub interaction: ComplexRows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Mode block. Missing `mean` means zero; missing `cov` means vacuum
/// `(c/2) I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesSpec {
    pub modes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSpec {
    pub coeffs: Vec<f64>,
    #[serde(default)]
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianFile {
    pub schema: u32,
    pub backend: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// `c` in `[X_k, Y_k] = i c`.
    pub comm_constant: f64,
    pub object: ModesSpec,
    pub probe: ModesSpec,
    pub a: Vec<LinearSpec>,
    pub b: Vec<LinearSpec>,
    pub m: Vec<LinearSpec>,
    /// Heisenberg-picture map on the interleaved canonical vector.
    pub channel: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ModelFile {
    Finite(FiniteFile),
    Gaussian(GaussianFile),
}

fn typed<T: DeserializeOwned>(value: Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::schema(path, e.into_inner().to_string())
    })
}

fn complex_matrix(rows: &ComplexRows, path: &str) -> Result<CMatrix> {
    let m = matrix_from_rows(rows).ok_or_else(|| Error::schema(path, "ragged matrix rows"))?;
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::schema(
            path,
            format!("expected a non-empty square matrix, got {}x{}", m.nrows(), m.ncols()),
        ));
    }
    Ok(m.map(pair_to_complex))
}

fn operator(rows: &ComplexRows, path: &str, tol: &Tolerances) -> Result<Operator> {
    let m = complex_matrix(rows, path)?;
    let residual = hermitian_residual(&m);
    if residual > tol.hermitian {
        return Err(Error::ContractViolation {
            what: format!("`{path}` is not Hermitian"),
            residual,
        });
    }
    Operator::hermitian(m, tol.hermitian)
}

fn state(sys: &FiniteSystem, path: &str, tol: &Tolerances) -> Result<QuantumState> {
    if sys.dim == 0 {
        return Err(Error::schema(format!("{path}.dim"), "dimension must be positive"));
    }
    let st = match &sys.state {
        StateSpec::Pure(v) => {
            let v = CVector::from_iterator(v.len(), v.iter().map(|p| pair_to_complex(*p)));
            QuantumState::pure(v, tol.norm)?
        }
        StateSpec::Density(rows) => {
            QuantumState::density(complex_matrix(rows, &format!("{path}.state.density"))?, tol)?
        }
    };
    if st.dim() != sys.dim {
        return Err(Error::schema(
            format!("{path}.state"),
            format!("state has dimension {}, expected {}", st.dim(), sys.dim),
        ));
    }
    Ok(st)
}

fn moments(spec: &ModesSpec, c: f64, path: &str) -> Result<GaussianMoments> {
    if spec.modes == 0 {
        return Err(Error::schema(format!("{path}.modes"), "mode count must be positive"));
    }
    let dim = 2 * spec.modes;
    let mean = match &spec.mean {
        Some(m) if m.len() != dim => {
            return Err(Error::schema(
                format!("{path}.mean"),
                format!("expected {dim} entries, got {}", m.len()),
            ))
        }
        Some(m) => DVector::from_vec(m.clone()),
        None => DVector::zeros(dim),
    };
    let cov = match &spec.cov {
        Some(rows) => {
            let cov =
                matrix_from_rows(rows).ok_or_else(|| Error::schema(format!("{path}.cov"), "ragged matrix rows"))?;
            if cov.shape() != (dim, dim) {
                return Err(Error::schema(
                    format!("{path}.cov"),
                    format!("expected {dim}x{dim}, got {}x{}", cov.nrows(), cov.ncols()),
                ));
            }
            cov
        }
        None => DMatrix::identity(dim, dim) * (c / 2.0),
    };
    GaussianMoments::new(mean, cov).map_err(|e| Error::schema(format!("{path}.cov"), e.to_string()))
}

fn linear(specs: &[LinearSpec], dim: usize, label: &str) -> Result<Vec<LinearObservable>> {
    specs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if s.coeffs.len() != dim {
                return Err(Error::schema(
                    format!("{label}[{i}].coeffs"),
                    format!("expected {dim} coefficients, got {}", s.coeffs.len()),
                ));
            }
            Ok(LinearObservable::new(DVector::from_vec(s.coeffs.clone()), s.offset))
        })
        .collect()
}

impl ModelFile {
    /// Parses and schema-checks a model file. Physics validation happens in
    /// [`ModelFile::to_model`].
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::schema("$", format!("malformed JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::schema("$", "expected a JSON object"))?;
        match obj.get("schema") {
            None => return Err(Error::schema("schema", "missing required field")),
            Some(v) if v.as_u64() != Some(u64::from(SCHEMA_VERSION)) => {
                return Err(Error::schema(
                    "schema",
                    format!("unsupported schema version {v}; expected {SCHEMA_VERSION}"),
                ))
            }
            Some(_) => {}
        }
        match obj.get("backend").and_then(Value::as_str) {
            Some("finite") => Ok(Self::Finite(typed(value)?)),
            Some("gaussian") => Ok(Self::Gaussian(typed(value)?)),
            Some(other) => Err(Error::schema(
                "backend",
                format!("unknown backend `{other}`; expected finite or gaussian"),
            )),
            None => Err(Error::schema("backend", "missing required field")),
        }
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("model files always serialize")
    }

    pub fn tolerances(&self) -> Option<&ToleranceOverrides> {
        match self {
            Self::Finite(f) => f.tolerances.as_ref(),
            Self::Gaussian(g) => g.tolerances.as_ref(),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Self::Finite(f) => f.seed,
            Self::Gaussian(g) => g.seed,
        }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Self::Finite(f) => f.name.as_deref(),
            Self::Gaussian(g) => g.name.as_deref(),
        }
    }

    /// Fields left to their defaults, for the report.
    pub fn defaults_applied(&self) -> Vec<String> {
        let mut notes = Vec::new();
        if let Self::Gaussian(g) = self {
            for (label, spec) in [("object", &g.object), ("probe", &g.probe)] {
                if spec.mean.is_none() {
                    notes.push(format!("{label}.mean defaulted to zero"));
                }
                if spec.cov.is_none() {
                    notes.push(format!("{label}.cov defaulted to vacuum (c/2) I"));
                }
            }
        }
        notes
    }

    /// Builds and validates the measurement model.
    pub fn to_model(&self, tol: &Tolerances) -> Result<MeasurementModel> {
        match self {
            Self::Finite(f) => {
                let ops = |list: &[ComplexRows], label: &str| {
                    list.iter()
                        .enumerate()
                        .map(|(i, rows)| operator(rows, &format!("{label}[{i}]"), tol))
                        .collect::<Result<Vec<_>>>()
                };
                let interaction = complex_matrix(&f.interaction, "interaction")?;
                let model = FiniteModel {
                    object_state: state(&f.object, "object", tol)?,
                    probe_state: state(&f.probe, "probe", tol)?,
                    a: ops(&f.a, "a")?,
                    b: ops(&f.b, "b")?,
                    m: ops(&f.m, "m")?,
                    interaction: Operator::unitary(interaction, tol.unitary)?,
                };
                MeasurementModel::finite(f.name.clone(), model, tol)
            }
            Self::Gaussian(g) => {
                let c = g.comm_constant;
                let algebra = CanonicalAlgebra::new(g.object.modes + g.probe.modes, c)
                    .map_err(|e| Error::schema("comm_constant", e.to_string()))?;
                let dim = algebra.dim();
                let channel =
                    matrix_from_rows(&g.channel).ok_or_else(|| Error::schema("channel", "ragged matrix rows"))?;
                if channel.shape() != (dim, dim) {
                    return Err(Error::schema(
                        "channel",
                        format!("expected {dim}x{dim}, got {}x{}", channel.nrows(), channel.ncols()),
                    ));
                }
                let model = GaussianModel {
                    algebra,
                    object_modes: g.object.modes,
                    object: moments(&g.object, c, "object")?,
                    probe: moments(&g.probe, c, "probe")?,
                    a: linear(&g.a, dim, "a")?,
                    b: linear(&g.b, dim, "b")?,
                    m: linear(&g.m, dim, "m")?,
                    channel: LinearChannel::new(channel, &algebra, tol.unitary)?,
                };
                MeasurementModel::gaussian(g.name.clone(), model, tol)
            }
        }
    }

    /// File form of a model with every default resolved.
    pub fn from_model(model: &MeasurementModel, tolerances: Option<ToleranceOverrides>, seed: Option<u64>) -> Self {
        let name = model.name().map(str::to_string);
        match model.backend() {
            Backend::Finite(f) => {
                let sys = |s: &QuantumState| FiniteSystem {
                    dim: s.dim(),
                    state: match s {
                        QuantumState::Pure(v) => StateSpec::Pure(complex_entries(v)),
                        QuantumState::Density(rho) => StateSpec::Density(complex_rows(rho)),
                    },
                };
                let ops = |list: &[Operator]| list.iter().map(|o| complex_rows(o.matrix())).collect();
                Self::Finite(FiniteFile {
                    schema: SCHEMA_VERSION,
                    backend: "finite".into(),
                    name,
                    object: sys(&f.object_state),
                    probe: sys(&f.probe_state),
                    a: ops(&f.a),
                    b: ops(&f.b),
                    m: ops(&f.m),
                    interaction: complex_rows(f.interaction.matrix()),
                    tolerances,
                    seed,
                })
            }
            Backend::Gaussian(g) => {
                let modes = |m: &GaussianMoments| ModesSpec {
                    modes: m.modes(),
                    mean: Some(m.mean().iter().copied().collect()),
                    cov: Some(real_rows(m.cov())),
                };
                let lin = |list: &[LinearObservable]| {
                    list.iter()
                        .map(|u| LinearSpec {
                            coeffs: u.coeffs.iter().copied().collect(),
                            offset: u.offset,
                        })
                        .collect()
                };
                Self::Gaussian(GaussianFile {
                    schema: SCHEMA_VERSION,
                    backend: "gaussian".into(),
                    name,
                    comm_constant: g.algebra.comm_constant(),
                    object: modes(&g.object),
                    probe: modes(&g.probe),
                    a: lin(&g.a),
                    b: lin(&g.b),
                    m: lin(&g.m),
                    channel: real_rows(g.channel.matrix()),
                    tolerances,
                    seed,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{cnot_model, identity_model};
    use crate::gaussian::bae_model;
    use crate::measurement::analyze;

    fn round_trip(model: &MeasurementModel) {
        let file = ModelFile::from_model(model, None, Some(7));
        let text = file.to_json_pretty();
        let back = ModelFile::from_json(&text).unwrap();
        assert_eq!(back, file);
        let rebuilt = back.to_model(&Tolerances::default()).unwrap();
        assert_eq!(&rebuilt, model);
        let tol = Tolerances::default();
        assert_eq!(analyze(&rebuilt, &tol).unwrap(), analyze(model, &tol).unwrap());
    }

    #[test]
    fn builtin_models_round_trip() {
        round_trip(&bae_model(1.0).unwrap());
        round_trip(&bae_model(0.3).unwrap());
        round_trip(&cnot_model().unwrap());
        round_trip(&identity_model().unwrap());
    }

    #[test]
    fn schema_version_is_required() {
        let err = ModelFile::from_json(r#"{"backend": "finite"}"#).unwrap_err();
        assert!(matches!(err, Error::Schema { ref path, .. } if path == "schema"));
        let err = ModelFile::from_json(r#"{"schema": 2, "backend": "finite"}"#).unwrap_err();
        assert!(matches!(err, Error::Schema { ref path, .. } if path == "schema"));
        let err = ModelFile::from_json(r#"{"schema": 1, "backend": "lattice"}"#).unwrap_err();
        assert!(matches!(err, Error::Schema { ref path, .. } if path == "backend"));
    }

    #[test]
    fn errors_name_field_paths() {
        let file = ModelFile::from_model(&cnot_model().unwrap(), None, None);
        let mut value = serde_json::to_value(&file).unwrap();
        value["a"][0][1][0] = serde_json::json!([1.0, "x"]);
        let err = ModelFile::from_json(&value.to_string()).unwrap_err();
        match err {
            Error::Schema { path, .. } => assert_eq!(path, "a[0][1][0][1]"),
            other => panic!("unexpected {other}"),
        }

        let mut value = serde_json::to_value(&file).unwrap();
        value["probe"]["state"] = serde_json::json!({"pure": [[1.0, 0.0]]});
        let err = ModelFile::from_json(&value.to_string())
            .unwrap()
            .to_model(&Tolerances::default())
            .unwrap_err();
        assert!(
            matches!(err, Error::Schema { ref path, .. } if path == "probe.state"),
            "{err}"
        );

        let mut value = serde_json::to_value(&file).unwrap();
        value["interaction"][0].as_array_mut().unwrap().pop();
        let err = ModelFile::from_json(&value.to_string())
            .unwrap()
            .to_model(&Tolerances::default())
            .unwrap_err();
        assert!(
            matches!(err, Error::Schema { ref path, .. } if path == "interaction"),
            "{err}"
        );

        let mut value = serde_json::to_value(&file).unwrap();
        value["extra"] = serde_json::json!(1);
        assert!(ModelFile::from_json(&value.to_string()).is_err());
    }

    #[test]
    fn gaussian_defaults_are_vacuum() {
        let text = r#"{
            "schema": 1, "backend": "gaussian", "comm_constant": 0.5,
            "object": {"modes": 1}, "probe": {"modes": 1},
            "a": [{"coeffs": [1, 0, 0, 0]}], "b": [{"coeffs": [0, 1, 0, 0]}],
            "m": [{"coeffs": [0, 0, 1, 0]}],
            "channel": [[1,0,0,0],[0,1,0,-1],[1,0,1,0],[0,0,0,1]]
        }"#;
        let file = ModelFile::from_json(text).unwrap();
        assert_eq!(file.defaults_applied().len(), 4);
        let model = file.to_model(&Tolerances::default()).unwrap();
        let Backend::Gaussian(g) = model.backend() else {
            unreachable!()
        };
        assert_eq!(g.object.cov(), &(DMatrix::identity(2, 2) * 0.25));
        let echo = ModelFile::from_model(&model, None, None);
        assert!(echo.defaults_applied().is_empty());
    }

    #[test]
    fn non_symplectic_channel_is_rejected() {
        let file = ModelFile::from_model(&bae_model(1.0).unwrap(), None, None);
        let mut value = serde_json::to_value(&file).unwrap();
        value["channel"][0][0] = serde_json::json!(2.0);
        let err = ModelFile::from_json(&value.to_string())
            .unwrap()
            .to_model(&Tolerances::default())
            .unwrap_err();
        assert!(matches!(err, Error::ContractViolation { .. }), "{err}");
    }
}
