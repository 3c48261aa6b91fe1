//! Proactive assessment: every mutation of an entry re-runs the instruments
//! on its head snapshot, recomputes the stage and caches a report whose delta
//! is taken against the previous report.

mod render;
mod watch;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::gates::{all_statuses, recompute_on_change, Attestation, AttributeStatus, GateInputs, Override, QualityModelConfig, Stage, StageTransition, Verdict};
use crate::instruments::{run_all, Finding, QualityAttribute};
use crate::model::{parse_model, ContentHash};
use crate::store::{CommitOutcome, EntryMeta, Hat, Library, Result, Review, ReviewStatus, Snapshot};

pub use render::render_text;
pub use watch::{watch, Debouncer, WatchEvent, WatchSession};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delta {
    pub new: Vec<Finding>,
    pub resolved: Vec<Finding>,
}

impl Delta {
    pub fn is_empty(&self) -> bool {
        self.new.is_empty() && self.resolved.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentReport {
    pub entry_id: String,
    pub seq_no: u64,
    pub content_hash: ContentHash,
    pub stage: Stage,
    pub statuses: BTreeMap<QualityAttribute, AttributeStatus>,
    /// Sorted by fingerprint.
    pub findings: Vec<Finding>,
    /// Fingerprints of findings currently covered by an active override.
    pub overridden: Vec<String>,
    pub delta: Delta,
    pub transition: StageTransition,
    pub generated_at: DateTime<Utc>,
}

/// Fingerprint-set difference between two finding lists.
pub fn compute_delta(previous: &[Finding], current: &[Finding]) -> Delta {
    let prev: BTreeSet<&str> = previous.iter().map(|f| f.fingerprint.as_str()).collect();
    let cur: BTreeSet<&str> = current.iter().map(|f| f.fingerprint.as_str()).collect();
    Delta {
        new: current.iter().filter(|f| !prev.contains(f.fingerprint.as_str())).cloned().collect(),
        resolved: previous.iter().filter(|f| !cur.contains(f.fingerprint.as_str())).cloned().collect(),
    }
}

/// Assesses one snapshot given the entry's human records. Pure apart from
/// the `generated_at` timestamp.
pub fn build_report(meta: &EntryMeta, head: &Snapshot, cfg: &QualityModelConfig) -> Result<AssessmentReport> {
    let model = parse_model(&head.source_text)?;
    let findings = run_all(&model, &cfg.thresholds);
    let overrides: Vec<Override> = meta.active_overrides().cloned().collect();
    let inputs = GateInputs {
        findings: &findings,
        overrides: &overrides,
        attestations: &meta.attestations,
        content_hash: &head.content_hash,
        open_black_hats: meta.open_black_hats(),
    };
    let statuses = all_statuses(&inputs);
    let previous = meta.last_assessment.as_ref();
    let transition = recompute_on_change(previous.map(|p| p.stage), &statuses, cfg);
    let delta = compute_delta(previous.map_or(&[][..], |p| &p.findings), &findings);
    let overridden = findings
        .iter()
        .filter(|f| overrides.iter().any(|o| o.covers(f)))
        .map(|f| f.fingerprint.clone())
        .collect();
    Ok(AssessmentReport {
        entry_id: meta.entry_id.clone(),
        seq_no: head.seq_no,
        content_hash: head.content_hash.clone(),
        stage: transition.to,
        statuses,
        findings,
        overridden,
        delta,
        transition,
        generated_at: Utc::now(),
    })
}

/// Report formats offered by [`Assessor::full_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "text" => Ok(ReportFormat::Text),
            other => Err(format!("unknown format `{other}` (expected json or text)")),
        }
    }
}

/// Wraps a [`Library`] so that every mutation is followed by an assessment.
///
/// Mutation and the assessment that follows it run under one pipeline lock,
/// so reports for an entry are produced strictly in mutation order.
#[derive(Debug)]
pub struct Assessor {
    lib: Library,
    pipeline: Mutex<()>,
}

impl Assessor {
    pub fn new(lib: Library) -> Self {
        Self { lib, pipeline: Mutex::new(()) }
    }

    pub fn library(&self) -> &Library {
        &self.lib
    }

    fn locked<T>(&self, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let _guard = self.pipeline.lock().unwrap_or_else(|p| p.into_inner());
        f()
    }

    fn assess_unlocked(&self, entry_id: &str) -> Result<AssessmentReport> {
        let report = self.evaluate(entry_id)?;
        self.lib.save_assessment(&report)?;
        Ok(report)
    }

    /// Computes a fresh report without caching it.
    pub fn evaluate(&self, entry_id: &str) -> Result<AssessmentReport> {
        let meta = self.lib.meta(entry_id)?;
        let head = self.lib.head(entry_id)?;
        build_report(&meta, &head, self.lib.config())
    }

    /// Computes, caches and returns a fresh report for the head snapshot.
    pub fn assess(&self, entry_id: &str) -> Result<AssessmentReport> {
        self.locked(|| self.assess_unlocked(entry_id))
    }

    /// The cached report, or a fresh uncached one if none exists yet.
    pub fn latest(&self, entry_id: &str) -> Result<AssessmentReport> {
        match self.lib.meta(entry_id)?.last_assessment {
            Some(r) => Ok(r),
            None => self.evaluate(entry_id),
        }
    }

    pub fn full_report(&self, entry_id: &str, format: ReportFormat) -> Result<String> {
        let report = self.latest(entry_id)?;
        Ok(match format {
            ReportFormat::Json => serde_json::to_string_pretty(&report).expect("report serializes"),
            ReportFormat::Text => render_text(&report),
        })
    }

    pub fn create_entry(&self, entry_id: &str, source: &str, author: &str) -> Result<(EntryMeta, Snapshot, AssessmentReport)> {
        self.locked(|| {
            let (_, snap) = self.lib.create_entry(entry_id, source, author)?;
            let report = self.assess_unlocked(entry_id)?;
            Ok((self.lib.meta(entry_id)?, snap, report))
        })
    }

    /// A no-op commit returns the cached report without reassessing.
    pub fn commit(&self, entry_id: &str, source: &str, author: &str) -> Result<(CommitOutcome, AssessmentReport)> {
        self.locked(|| {
            let outcome = self.lib.commit_snapshot(entry_id, source, author)?;
            let report = if outcome.no_op {
                match self.lib.meta(entry_id)?.last_assessment {
                    Some(r) => r,
                    None => self.assess_unlocked(entry_id)?,
                }
            } else {
                self.assess_unlocked(entry_id)?
            };
            Ok((outcome, report))
        })
    }

    pub fn add_review(&self, entry_id: &str, hat: Hat, text: &str, author: &str) -> Result<(Review, AssessmentReport)> {
        self.locked(|| {
            let review = self.lib.add_review(entry_id, hat, text, author)?;
            Ok((review, self.assess_unlocked(entry_id)?))
        })
    }

    pub fn set_review_status(&self, review_id: &str, status: ReviewStatus) -> Result<(Review, AssessmentReport)> {
        self.locked(|| {
            let review = self.lib.set_review_status(review_id, status)?;
            let entry = Library::review_entry(review_id)?;
            Ok((review, self.assess_unlocked(entry)?))
        })
    }

    pub fn record_attestation(&self, entry_id: &str, attribute: QualityAttribute, verdict: Verdict, reviewer: &str) -> Result<(Attestation, AssessmentReport)> {
        self.locked(|| {
            let att = self.lib.record_attestation(entry_id, attribute, verdict, reviewer)?;
            Ok((att, self.assess_unlocked(entry_id)?))
        })
    }

    pub fn record_override(&self, entry_id: &str, metric_id: &str, element_path: &str, justification: &str, author: &str) -> Result<(Override, AssessmentReport)> {
        self.locked(|| {
            let ov = self.lib.record_override(entry_id, metric_id, element_path, justification, author)?;
            Ok((ov, self.assess_unlocked(entry_id)?))
        })
    }

    pub fn revoke_override(&self, entry_id: &str, metric_id: &str, element_path: &str) -> Result<(Override, AssessmentReport)> {
        self.locked(|| {
            let ov = self.lib.revoke_override(entry_id, metric_id, element_path)?;
            Ok((ov, self.assess_unlocked(entry_id)?))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(metric: &str, path: &str) -> Finding {
        Finding::new(metric, path, "m", "s")
    }

    #[test]
    fn delta_by_fingerprint() {
        let a = f("long-parameter-list", "A.op.f");
        let b = f("technology-leftover-name", "SongDAO");
        let c = f("high-fanout", "A");
        let d = compute_delta(&[a.clone(), b.clone()], &[a.clone(), c.clone()]);
        assert_eq!(d.new, vec![c]);
        assert_eq!(d.resolved, vec![b]);
        let same = std::slice::from_ref(&a);
        assert!(compute_delta(same, same).is_empty());
    }
}
