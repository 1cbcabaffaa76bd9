//! Canonical machine-readable rendering of reports: stable field order and
//! 17-significant-digit numbers, so identical runs produce identical bytes
//! and every printed value round-trips exactly.

use crate::bounds::BoundReport;
use crate::eigen::EigenvalueReport;
use crate::ensemble::ProbeOutcome;
use crate::schema::{spec_to_json, AnySpec};

/// 17 significant digits in scientific notation; enough to round-trip any
/// f64. Non-finite values render as JSON null.
pub fn fmt_float(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    // kill the sign of -0.0 so equal values print identically
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn bound_report_object(r: &BoundReport) -> String {
    format!(
        "{{\"theorem\":\"{}\",\"lhs\":{},\"rhs\":{},\"slack\":{},\"ratio\":{},\"verdict\":\"{}\",\"tolerance\":{}}}",
        r.theorem.label(),
        fmt_float(r.lhs),
        fmt_float(r.rhs),
        fmt_float(r.slack),
        fmt_float(r.ratio),
        r.verdict.as_str(),
        fmt_float(r.tolerance),
    )
}

/// JSON array of report objects, one per line.
pub fn reports_to_json(reports: &[BoundReport]) -> String {
    if reports.is_empty() {
        return "[]\n".into();
    }
    let mut out = String::from("[\n");
    for (i, r) in reports.iter().enumerate() {
        out.push_str(&bound_report_object(r));
        out.push_str(if i + 1 < reports.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    out
}

/// CSV with the fixed header `theorem,lhs,rhs,slack,ratio,verdict,tolerance`.
pub fn reports_to_csv(reports: &[BoundReport]) -> String {
    let mut out = String::from("theorem,lhs,rhs,slack,ratio,verdict,tolerance\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.theorem.label(),
            fmt_float(r.lhs),
            fmt_float(r.rhs),
            fmt_float(r.slack),
            fmt_float(r.ratio),
            r.verdict.as_str(),
            fmt_float(r.tolerance),
        ));
    }
    out
}

fn float_list(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|&v| fmt_float(v)).collect();
    format!("[{}]", items.join(","))
}

/// JSON object for a spectrum report.
pub fn eigen_report_to_json(r: &EigenvalueReport) -> String {
    format!(
        "{{\"e_plus\":{},\"e_minus\":{},\"err_plus\":{},\"err_minus\":{},\"band_half_width\":{},\"delta_edge\":{},\"window\":[{},{}],\"converged\":{},\"edge_flagged\":{}}}\n",
        float_list(&r.e_plus),
        float_list(&r.e_minus),
        float_list(&r.err_plus),
        float_list(&r.err_minus),
        fmt_float(r.band_half_width),
        fmt_float(r.delta_edge),
        r.window.0,
        r.window.1,
        r.converged,
        r.edge_flagged,
    )
}

/// JSON object for a conjecture-probe outcome. Findings are observations,
/// never failures, and are listed in sample order.
pub fn probe_to_json(seed: u64, out: &ProbeOutcome) -> String {
    let witness = match &out.witness {
        Some((index, spec)) => format!(
            "{{\"index\":{index},\"spec\":{}}}",
            spec_to_json(&AnySpec::Chain(spec.clone()))
        ),
        None => "null".into(),
    };
    let findings: Vec<String> = out
        .findings
        .iter()
        .map(|f| format!("{{\"index\":{},\"slack\":{}}}", f.index, fmt_float(f.slack)))
        .collect();
    format!(
        "{{\"seed\":{seed},\"samples\":{},\"skipped\":{},\"min_slack\":{},\"witness\":{},\"findings\":[{}]}}\n",
        out.samples,
        out.skipped,
        fmt_float(out.min_slack),
        witness,
        findings.join(","),
    )
}
