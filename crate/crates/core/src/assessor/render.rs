use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::AssessmentReport;
use crate::instruments::{by_attribute, QualityAttribute};

/// Plain-text report. Findings are grouped by attribute, each with its cause
/// and suggested fix. The generation timestamp is left out so that the text
/// is stable for a given library state.
pub fn render_text(r: &AssessmentReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "stage: {}", r.stage.label());
    let _ = writeln!(out, "entry: {} @ snapshot {}", r.entry_id, r.seq_no);
    let transition = match (r.transition.from, r.transition.demoted) {
        (None, _) => format!("initial assessment -> {}", r.transition.to),
        (Some(from), true) => format!("{from} -> {} (demoted)", r.transition.to),
        (Some(from), false) => format!("{from} -> {}", r.transition.to),
    };
    let _ = writeln!(out, "transition: {transition}");

    out.push_str("attributes:\n");
    for attr in QualityAttribute::ALL {
        let status = r.statuses.get(&attr).map_or("unknown", |s| s.as_str());
        let _ = writeln!(out, "  {:<7} {:<22} {status}", attr.characteristic().as_str(), attr.as_str());
    }

    let new: BTreeSet<&str> = r.delta.new.iter().map(|f| f.fingerprint.as_str()).collect();
    let _ = writeln!(
        out,
        "findings: {} ({} new, {} resolved)",
        r.findings.len(),
        r.delta.new.len(),
        r.delta.resolved.len()
    );
    for (attr, findings) in by_attribute(&r.findings) {
        let _ = writeln!(out, "  {attr}");
        let mut findings = findings;
        findings.sort_by(|a, b| (&a.element_path, &a.metric_id).cmp(&(&b.element_path, &b.metric_id)));
        for f in findings {
            let mut tags = Vec::new();
            if new.contains(f.fingerprint.as_str()) {
                tags.push("new");
            }
            if r.overridden.contains(&f.fingerprint) {
                tags.push("overridden");
            }
            let tags = if tags.is_empty() { String::new() } else { format!(" [{}]", tags.join(", ")) };
            let _ = writeln!(out, "    {} at {}{tags}", f.metric_id, f.element_path);
            let _ = writeln!(out, "      cause: {}", f.message);
            let _ = writeln!(out, "      fix: {}", f.suggestion);
        }
    }
    if !r.delta.resolved.is_empty() {
        out.push_str("resolved:\n");
        for f in &r.delta.resolved {
            let _ = writeln!(out, "  {} at {}", f.metric_id, f.element_path);
        }
    }
    out
}
