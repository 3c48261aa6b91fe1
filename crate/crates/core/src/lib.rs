//! A quality-gated library of class models.
//!
//! Models are written in a small textual DSL ([`model`]), stored as
//! content-hashed snapshots in an append-only library ([`store`]), measured by
//! strong, medium and weak instruments ([`instruments`]) and placed on one of
//! three stages by cumulative quality gates ([`gates`]). The [`assessor`]
//! re-runs all of this whenever an entry changes.

pub mod assessor;
pub mod gates;
pub mod instruments;
pub mod model;
pub mod store;

pub use assessor::{AssessmentReport, Assessor, Delta, ReportFormat, WatchEvent, WatchSession};
pub use gates::{AttributeStatus, Attestation, Override, QualityModelConfig, Stage, StageTransition, Verdict};
pub use instruments::{CharacteristicClass, Finding, QualityAttribute, Thresholds};
pub use model::{canonical_print, content_hash, parse_model, ContentHash, ModelUnit, ParseError};
pub use store::{Hat, Library, Review, ReviewStatus, StoreError};
