use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by every check.
///
/// `hermitian`, `unitary` and `norm` are relative residual bounds used when
/// validating inputs; `psd` is relative to the spectral scale of the matrix
/// under test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub hermitian: f64,
    pub unitary: f64,
    pub norm: f64,
    pub psd: f64,
    pub max_dim: usize,
}

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_DIM: usize = 4096;

impl Default for Tolerances {
    fn default() -> Self {
        Self::uniform(DEFAULT_TOL)
    }
}

impl Tolerances {
    /// All four residual tolerances set to `tol`, default maximum dimension.
    pub fn uniform(tol: f64) -> Self {
        Self {
            hermitian: tol,
            unitary: tol,
            norm: tol,
            psd: tol,
            max_dim: DEFAULT_MAX_DIM,
        }
    }

    pub fn with_psd(mut self, psd: f64) -> Self {
        self.psd = psd;
        self
    }
}

/// Partial tolerance settings as they appear in model files.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hermitian: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dim: Option<usize>,
}

impl ToleranceOverrides {
    pub fn apply(&self, base: Tolerances) -> Tolerances {
        Tolerances {
            hermitian: self.hermitian.unwrap_or(base.hermitian),
            unitary: self.unitary.unwrap_or(base.unitary),
            norm: self.norm.unwrap_or(base.norm),
            psd: self.psd.unwrap_or(base.psd),
            max_dim: self.max_dim.unwrap_or(base.max_dim),
        }
    }

    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

/// Rejects tolerances that are not finite and positive.
pub fn validate_tolerance(tol: f64) -> Result<f64, String> {
    if tol.is_finite() && tol > 0.0 {
        Ok(tol)
    } else {
        Err(format!("tolerance must be a positive finite number, got {tol}"))
    }
}
