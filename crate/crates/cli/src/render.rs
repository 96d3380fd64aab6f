//! Line-oriented text renderings for sweep, fuzz and covariance output.

use std::fmt::Write as _;

use ur_core::builtin::SweepDocument;
use ur_core::fuzz::{FuzzBackend, FuzzSummary};
use ur_core::measurement::ScalarCheck;
use ur_core::report::fmt12;

use crate::CovarianceDocument;

pub fn sweep_text(doc: &SweepDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "sweep: {} over {}", doc.example, doc.param);
    let _ = writeln!(
        out,
        "{} epsilon eta product min_eigenvalue determinant matrix_holds heisenberg_holds ozawa_holds",
        doc.param
    );
    for r in &doc.rows {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {} {} {}",
            fmt12(r.gain),
            fmt12(r.epsilon),
            fmt12(r.eta),
            fmt12(r.product),
            fmt12(r.min_eigenvalue),
            fmt12(r.determinant),
            r.matrix_holds,
            r.heisenberg_holds,
            r.ozawa_holds
        );
    }
    out
}

pub fn fuzz_text(s: &FuzzSummary) -> String {
    let mut out = String::new();
    let c = &s.config;
    match c.backend {
        FuzzBackend::Finite { object_dim, probe_dim } => {
            let _ = writeln!(out, "backend: finite {object_dim}x{probe_dim}");
        }
        FuzzBackend::Gaussian { modes } => {
            let _ = writeln!(out, "backend: gaussian modes={modes}");
        }
    }
    let _ = writeln!(out, "trials: {}", c.trials);
    let _ = writeln!(out, "seed: {}", c.seed);
    let _ = writeln!(out, "physical_violations: {}", s.physical_violations);
    for v in &s.violations {
        let _ = writeln!(
            out,
            "violation: trial={} min_eigenvalue={}",
            v.trial,
            fmt12(v.min_eigenvalue)
        );
    }
    let _ = writeln!(out, "near_saturation: {}", s.near_saturation);
    let _ = writeln!(out, "heisenberg_violations: {}", s.heisenberg_violations);
    let _ = writeln!(out, "determinant_chain_failures: {}", s.determinant_chain_failures);
    let _ = writeln!(
        out,
        "identity_residual: max={} mean={}",
        fmt12(s.identity_residual.max),
        fmt12(s.identity_residual.mean)
    );
    let _ = writeln!(
        out,
        "out_commutator_residual: max={} mean={}",
        fmt12(s.out_commutator_residual.max),
        fmt12(s.out_commutator_residual.mean)
    );
    if let Some(t) = &s.tightest {
        let _ = writeln!(
            out,
            "tightest: trial={} relative_margin={}",
            t.trial,
            fmt12(t.relative_margin)
        );
    }
    if let Some(r) = &s.reference {
        let _ = writeln!(
            out,
            "reference: physical={} probe_min_eigenvalue={} product={} heisenberg_saturated={} matrix_holds={} determinant={}",
            r.physical,
            fmt12(r.probe_min_eigenvalue),
            fmt12(r.product),
            r.heisenberg_saturated,
            r.matrix_holds,
            fmt12(r.determinant)
        );
    }
    out
}

fn check(out: &mut String, label: &str, c: &ScalarCheck) {
    let _ = writeln!(
        out,
        "{label}: lhs={} rhs={} holds={}",
        fmt12(c.lhs),
        fmt12(c.rhs),
        c.holds
    );
}

pub fn covariance_text(doc: &CovarianceDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model: {}", doc.model.as_deref().unwrap_or("(unnamed)"));
    let _ = writeln!(out, "angle: {}", fmt12(doc.angle));
    let _ = writeln!(out, "matrix_holds: {}", doc.matrix_holds);
    match (&doc.rotation, &doc.rotation_skipped) {
        (Some(r), _) => {
            let _ = writeln!(out, "gamma_constant: {}", fmt12(r.gamma_constant));
            let _ = writeln!(
                out,
                "before: epsilon={} eta={} correlation={}",
                fmt12(r.epsilon),
                fmt12(r.eta),
                fmt12(r.correlation)
            );
            let _ = writeln!(
                out,
                "after: epsilon={} eta={} correlation={}",
                fmt12(r.epsilon_rotated),
                fmt12(r.eta_rotated),
                fmt12(r.correlation_rotated)
            );
            check(&mut out, "product_bound_before", &r.product_bound_before);
            check(&mut out, "product_bound_after", &r.product_bound_after);
            if let Some(sum) = &r.rotated_sum_bound {
                check(&mut out, "rotated_sum_bound", sum);
            }
            let _ = writeln!(
                out,
                "matrix: before_psd={} after_psd={} unchanged={}",
                r.matrix_before.is_psd, r.matrix_after.is_psd, r.verdict_unchanged
            );
        }
        (None, Some(why)) => {
            let _ = writeln!(out, "rotation: skipped ({why})");
        }
        (None, None) => {}
    }
    if let Some(inv) = &doc.invariance {
        let _ = writeln!(
            out,
            "invariance: maps={} seed={} before_psd={} unchanged={} changed={}",
            inv.maps, inv.seed, inv.before_psd, inv.unchanged, inv.changed
        );
    }
    out
}
