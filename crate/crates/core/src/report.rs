//! Report documents and their JSON and text renderings.

use std::fmt::Write as _;

use serde::Serialize;

use crate::measurement::{ScalarCheck, UncertaintyReport};
use crate::model::ModelFile;
use crate::operators::PsdVerdict;
use crate::tolerance::Tolerances;

pub const TOOL_NAME: &str = "ur";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub model: ModelFile,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub report: UncertaintyReport,
    pub duration_seconds: f64,
}

impl ReportDocument {
    pub fn new(model: ModelFile, tolerances: Tolerances, report: UncertaintyReport, duration_seconds: f64) -> Self {
        let mut notes = model.defaults_applied();
        notes.sort();
        Self {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            seed: model.seed(),
            model,
            notes,
            tolerances,
            report,
            duration_seconds,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn to_text(&self) -> String {
        render_text(self)
    }
}

/// `x` rounded to 12 significant digits, printed in shortest form.
pub fn fmt12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        return "0".into();
    }
    let magnitude = rounded.abs();
    if (1e-4..1e12).contains(&magnitude) {
        rounded.to_string()
    } else {
        format!("{rounded:e}")
    }
}

fn row(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(fmt12).collect::<Vec<_>>().join(" ")
}

fn verdict_line(out: &mut String, label: &str, v: &PsdVerdict) {
    let _ = writeln!(
        out,
        "{label}: psd={} min_eigenvalue={} determinant={} determinant_imag={} eigenvalues=[{}]",
        v.is_psd,
        fmt12(v.min_eigenvalue),
        fmt12(v.determinant),
        fmt12(v.determinant_imag_residual),
        row(v.eigenvalues.iter().copied())
    );
}

fn check_line(out: &mut String, label: &str, c: &ScalarCheck) {
    let _ = writeln!(
        out,
        "{label}: lhs={} rhs={} holds={} saturated={}",
        fmt12(c.lhs),
        fmt12(c.rhs),
        c.holds,
        c.saturated
    );
}

fn matrix_lines(out: &mut String, label: &str, m: &nalgebra::DMatrix<f64>) {
    for (r, values) in m.row_iter().enumerate() {
        let _ = writeln!(out, "{label}[{r}]: {}", row(values.iter().copied()));
    }
}

fn render_text(doc: &ReportDocument) -> String {
    let r = &doc.report;
    let t = &doc.tolerances;
    let mut out = String::new();
    let _ = writeln!(out, "tool: {} {}", doc.tool, doc.version);
    let _ = writeln!(out, "model: {}", doc.model.name().unwrap_or("(unnamed)"));
    let _ = writeln!(out, "backend: {}", r.backend);
    let _ = writeln!(out, "n: {}", r.n);
    if let Some(seed) = doc.seed {
        let _ = writeln!(out, "seed: {seed}");
    }
    let _ = writeln!(
        out,
        "tolerances: hermitian={} unitary={} norm={} psd={} max_dim={}",
        fmt12(t.hermitian),
        fmt12(t.unitary),
        fmt12(t.norm),
        fmt12(t.psd),
        t.max_dim
    );
    for note in &doc.notes {
        let _ = writeln!(out, "note: {note}");
    }
    matrix_lines(&mut out, "K", &r.k_matrix);
    matrix_lines(&mut out, "Gamma", &r.gamma);
    matrix_lines(&mut out, "G", &r.gexp);
    for (label, values) in [
        ("epsilon", &r.epsilon),
        ("eta", &r.eta),
        ("sigma_a", &r.sigma_a),
        ("sigma_b", &r.sigma_b),
    ] {
        for (k, v) in values.iter().enumerate() {
            let _ = writeln!(out, "{label}[{k}]: {}", fmt12(*v));
        }
    }
    for p in &r.pairs {
        let tag = format!("pair({},{})", p.i, p.j);
        let _ = writeln!(out, "{tag} product: {}", fmt12(r.epsilon[p.i] * r.eta[p.j]));
        check_line(&mut out, &format!("{tag} ozawa"), &p.ozawa);
        check_line(&mut out, &format!("{tag} heisenberg"), &p.heisenberg);
        check_line(&mut out, &format!("{tag} robertson"), &p.robertson);
        let d = &p.determinant_chain;
        check_line(&mut out, &format!("{tag} minor"), &d.minor_bound);
        check_line(
            &mut out,
            &format!("{tag} minor_uncorrelated"),
            &d.minor_bound_uncorrelated,
        );
        check_line(&mut out, &format!("{tag} reverse_triangle"), &d.reverse_triangle_bound);
        check_line(&mut out, &format!("{tag} difference"), &d.difference_bound);
    }
    let _ = writeln!(out, "independent_intervention: {}", r.independent_intervention);
    verdict_line(&mut out, "matrix_oup", &r.matrix_oup);
    verdict_line(&mut out, "matrix_heisenberg", &r.matrix_heisenberg);
    verdict_line(&mut out, "rsup", &r.rsup);
    if let Some(phys) = &r.moments_physicality {
        verdict_line(&mut out, "physicality object", &phys.object);
        verdict_line(&mut out, "physicality probe", &phys.probe);
        if !(phys.object.is_psd && phys.probe.is_psd) {
            let _ = writeln!(out, "warning: initial moments are not realizable by any quantum state");
        }
    }
    let d = &r.diagnostics;
    let _ = writeln!(
        out,
        "diagnostics: out_commutator={} decomposition={} k_symmetry={} gamma_skew={} g_skew={}",
        fmt12(d.out_commutator_residual),
        fmt12(d.decomposition_residual),
        fmt12(d.k_symmetry_residual),
        fmt12(d.gamma_skew_residual),
        fmt12(d.gexp_skew_residual)
    );
    let _ = writeln!(out, "duration_seconds: {}", fmt12(doc.duration_seconds));
    let _ = writeln!(
        out,
        "verdict: matrix inequality {}",
        if r.matrix_holds() { "holds" } else { "FAILS" }
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::cnot_model;
    use crate::gaussian::bae_model;
    use crate::measurement::analyze;

    fn document(model: &crate::measurement::MeasurementModel) -> ReportDocument {
        let tol = Tolerances::default();
        ReportDocument::new(
            ModelFile::from_model(model, None, None),
            tol,
            analyze(model, &tol).unwrap(),
            0.0,
        )
    }

    #[test]
    fn twelve_digit_formatting() {
        assert_eq!(fmt12(0.25), "0.25");
        assert_eq!(fmt12(std::f64::consts::SQRT_2), "1.41421356237");
        assert_eq!(fmt12(-0.25000000000000006), "-0.25");
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(1.0e-20), "1e-20");
        assert_eq!(fmt12(1.0e-10), "1e-10");
        assert_eq!(fmt12(-2.5e13), "-2.5e13");
    }

    /// Every number in the text rendering equals the corresponding JSON value
    /// rounded to 12 significant digits.
    #[test]
    fn text_and_json_carry_the_same_numbers() {
        let doc = document(&bae_model(1.0).unwrap());
        let json: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
        let text = doc.to_text();
        let field = |prefix: &str| -> String {
            text.lines()
                .find_map(|l| l.strip_prefix(prefix))
                .unwrap_or_else(|| panic!("missing `{prefix}`"))
                .trim()
                .to_string()
        };
        let k = &json["report"]["k_matrix"];
        for r in 0..2 {
            let want: Vec<String> = (0..2).map(|c| fmt12(k[r][c].as_f64().unwrap())).collect();
            assert_eq!(field(&format!("K[{r}]:")), want.join(" "));
        }
        assert_eq!(
            field("epsilon[0]:"),
            fmt12(json["report"]["epsilon"][0].as_f64().unwrap())
        );
        let det = json["report"]["matrix_oup"]["determinant"].as_f64().unwrap();
        assert!(field("matrix_oup:").contains(&format!("determinant={}", fmt12(det))));
        assert!(text.contains("physicality probe: psd=false"));
        assert!(text.contains("verdict: matrix inequality FAILS"));
    }

    #[test]
    fn cnot_text_report() {
        let text = document(&cnot_model().unwrap()).to_text();
        assert!(text.contains("eta[0]: 1.41421356237"));
        assert!(text.contains("verdict: matrix inequality holds"));
        assert!(!text.contains("physicality"));
    }
}
