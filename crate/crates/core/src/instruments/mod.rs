//! Quality measurement instruments.
//!
//! Strong instruments are exact model checks whose findings can never be
//! suppressed. Medium instruments are thresholded smells that a modeler may
//! override. Weak instruments only produce advisory findings; the status of a
//! weak attribute is decided by human attestations.

mod medium;
mod strong;
mod weak;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::{resolve, ModelUnit};

pub use medium::check_medium;
pub use strong::check_strong;
pub use weak::{check_weak_heuristics, purpose_keywords, purpose_overlap, STOPWORDS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CharacteristicClass {
    Strong,
    Medium,
    Weak,
}

impl CharacteristicClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CharacteristicClass::Strong => "strong",
            CharacteristicClass::Medium => "medium",
            CharacteristicClass::Weak => "weak",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QualityAttribute {
    DefectFreeness,
    MetaModelConformity,
    Transformability,
    Confinement,
    Understandability,
    Maintainability,
    SemanticValidity,
    Completeness,
    PurposeExtraction,
    Appeal,
}

impl QualityAttribute {
    pub const ALL: [QualityAttribute; 10] = [
        QualityAttribute::DefectFreeness,
        QualityAttribute::MetaModelConformity,
        QualityAttribute::Transformability,
        QualityAttribute::Confinement,
        QualityAttribute::Understandability,
        QualityAttribute::Maintainability,
        QualityAttribute::SemanticValidity,
        QualityAttribute::Completeness,
        QualityAttribute::PurposeExtraction,
        QualityAttribute::Appeal,
    ];

    pub fn characteristic(self) -> CharacteristicClass {
        use QualityAttribute::*;
        match self {
            DefectFreeness | MetaModelConformity | Transformability => CharacteristicClass::Strong,
            Confinement | Understandability | Maintainability => CharacteristicClass::Medium,
            SemanticValidity | Completeness | PurposeExtraction | Appeal => CharacteristicClass::Weak,
        }
    }

    pub fn as_str(self) -> &'static str {
        use QualityAttribute::*;
        match self {
            DefectFreeness => "defect-freeness",
            MetaModelConformity => "meta-model-conformity",
            Transformability => "transformability",
            Confinement => "confinement",
            Understandability => "understandability",
            Maintainability => "maintainability",
            SemanticValidity => "semantic-validity",
            Completeness => "completeness",
            PurposeExtraction => "purpose-extraction",
            Appeal => "appeal",
        }
    }
}

impl fmt::Display for QualityAttribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown quality attribute `{0}`")]
pub struct UnknownAttribute(pub String);

impl FromStr for QualityAttribute {
    type Err = UnknownAttribute;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|a| a.as_str() == s).ok_or_else(|| UnknownAttribute(s.to_string()))
    }
}

/// Every metric the instruments can emit, with the attribute it informs.
pub const METRICS: &[(&str, QualityAttribute)] = &[
    ("empty-class-name", QualityAttribute::DefectFreeness),
    ("empty-member-name", QualityAttribute::DefectFreeness),
    ("duplicate-class-name", QualityAttribute::DefectFreeness),
    ("duplicate-member-name", QualityAttribute::DefectFreeness),
    ("unresolved-type-ref", QualityAttribute::MetaModelConformity),
    ("inheritance-cycle", QualityAttribute::MetaModelConformity),
    ("bad-multiplicity", QualityAttribute::MetaModelConformity),
    ("dangling-assoc-end", QualityAttribute::MetaModelConformity),
    ("reserved-word-name", QualityAttribute::Transformability),
    ("generated-name-collision", QualityAttribute::Transformability),
    ("untypable-operation", QualityAttribute::Transformability),
    ("too-many-classes", QualityAttribute::Understandability),
    ("too-many-attributes", QualityAttribute::Understandability),
    ("disconnected-model", QualityAttribute::Confinement),
    ("too-many-elements", QualityAttribute::Confinement),
    ("long-parameter-list", QualityAttribute::Maintainability),
    ("deep-inheritance", QualityAttribute::Maintainability),
    ("high-fanout", QualityAttribute::Maintainability),
    ("technology-leftover-name", QualityAttribute::Maintainability),
    ("purpose-mismatch", QualityAttribute::PurposeExtraction),
];

pub fn metric_attribute(metric_id: &str) -> Option<QualityAttribute> {
    METRICS.iter().find(|(id, _)| *id == metric_id).map(|(_, a)| *a)
}

pub fn is_medium_metric(metric_id: &str) -> bool {
    metric_attribute(metric_id).is_some_and(|a| a.characteristic() == CharacteristicClass::Medium)
}

/// SHA-256 over `(metric_id, element_path)`; identifies a violation site
/// across snapshots.
pub fn fingerprint(metric_id: &str, element_path: &str) -> String {
    let mut h = Sha256::new();
    h.update(metric_id.as_bytes());
    h.update([0u8]);
    h.update(element_path.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub fingerprint: String,
    pub metric_id: String,
    pub attribute: QualityAttribute,
    pub characteristic: CharacteristicClass,
    pub element_path: String,
    pub message: String,
    pub suggestion: String,
}

impl Finding {
    /// Panics if `metric_id` is not listed in [`METRICS`].
    pub fn new(metric_id: &str, element_path: impl Into<String>, message: impl Into<String>, suggestion: impl Into<String>) -> Self {
        let attribute = metric_attribute(metric_id).unwrap_or_else(|| panic!("unregistered metric {metric_id}"));
        let element_path = element_path.into();
        Self {
            fingerprint: fingerprint(metric_id, &element_path),
            metric_id: metric_id.to_string(),
            attribute,
            characteristic: attribute.characteristic(),
            element_path,
            message: message.into(),
            suggestion: suggestion.into(),
        }
    }
}

/// Sorts by fingerprint and drops repeated sites.
pub fn normalize(mut findings: Vec<Finding>) -> Vec<Finding> {
    findings.sort_by(|a, b| a.fingerprint.cmp(&b.fingerprint));
    findings.dedup_by(|a, b| a.fingerprint == b.fingerprint);
    findings
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub max_classes: u32,
    pub max_params: u32,
    pub max_dit: u32,
    pub max_fanout: u32,
    pub max_elements: u32,
    pub max_attrs_per_class: u32,
    pub leftover_suffixes: Vec<String>,
    pub purpose_min_overlap: f64,
    pub reserved_words: Vec<String>,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            max_classes: 30,
            max_params: 4,
            max_dit: 5,
            max_fanout: 7,
            max_elements: 50,
            max_attrs_per_class: 10,
            leftover_suffixes: ["DAO", "Impl", "Bean", "EJB"].map(String::from).to_vec(),
            purpose_min_overlap: 0.5,
            reserved_words: ["class", "type", "new", "return"].map(String::from).to_vec(),
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("max_classes", self.max_classes),
            ("max_dit", self.max_dit),
            ("max_fanout", self.max_fanout),
            ("max_elements", self.max_elements),
            ("max_attrs_per_class", self.max_attrs_per_class),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(format!("{name} must be positive"));
            }
        }
        if !(0.0..=1.0).contains(&self.purpose_min_overlap) {
            return Err("purpose_min_overlap must lie in [0, 1]".into());
        }
        if self.leftover_suffixes.iter().any(String::is_empty) {
            return Err("leftover_suffixes must not contain empty strings".into());
        }
        Ok(())
    }
}

/// Runs every instrument over one model.
pub fn run_all(m: &ModelUnit, t: &Thresholds) -> Vec<Finding> {
    let resolution = resolve(m);
    let mut all = check_strong(m, &resolution, t);
    all.extend(check_medium(m, &resolution, t));
    all.extend(check_weak_heuristics(m, t));
    normalize(all)
}

/// Findings grouped by the attribute they inform.
pub fn by_attribute(findings: &[Finding]) -> BTreeMap<QualityAttribute, Vec<&Finding>> {
    let mut map: BTreeMap<QualityAttribute, Vec<&Finding>> = BTreeMap::new();
    for f in findings {
        map.entry(f.attribute).or_default().push(f);
    }
    map
}
