//! The quality model: stages, gates and the status rules that combine
//! instrument findings with human records.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::instruments::{CharacteristicClass, Finding, QualityAttribute, Thresholds};
use crate::model::ContentHash;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Vague,
    Decent,
    Fine,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Vague, Stage::Decent, Stage::Fine];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Vague => "vague",
            Stage::Decent => "decent",
            Stage::Fine => "fine",
        }
    }

    pub fn color(self) -> &'static str {
        match self {
            Stage::Vague => "red",
            Stage::Decent => "yellow",
            Stage::Fine => "green",
        }
    }

    /// `fine (green)`
    pub fn label(self) -> String {
        format!("{} ({})", self.as_str(), self.color())
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|st| st.as_str() == s).ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttributeStatus {
    Satisfied,
    Violated,
    PendingHuman,
}

impl AttributeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            AttributeStatus::Satisfied => "satisfied",
            AttributeStatus::Violated => "violated",
            AttributeStatus::PendingHuman => "pending-human",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pass" => Ok(Verdict::Pass),
            "fail" => Ok(Verdict::Fail),
            other => Err(format!("unknown verdict `{other}` (expected pass or fail)")),
        }
    }
}

/// A human verdict on a weak attribute, valid only for the exact model
/// content it was given on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attestation {
    pub attribute: QualityAttribute,
    pub content_hash: ContentHash,
    pub reviewer: String,
    pub verdict: Verdict,
    pub created_at: DateTime<Utc>,
}

/// A modeler's justified dismissal of one medium finding site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Override {
    pub metric_id: String,
    pub element_path: String,
    pub justification: String,
    pub author: String,
    pub created_at: DateTime<Utc>,
    pub revoked: bool,
}

impl Override {
    pub fn covers(&self, f: &Finding) -> bool {
        !self.revoked && self.metric_id == f.metric_id && self.element_path == f.element_path
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityModelConfig {
    pub gate_of: BTreeMap<QualityAttribute, Stage>,
    pub thresholds: Thresholds,
}

impl Default for QualityModelConfig {
    fn default() -> Self {
        use QualityAttribute::*;
        let decent = [DefectFreeness, MetaModelConformity, Understandability, Confinement, SemanticValidity];
        let fine = [Transformability, Maintainability, Completeness, PurposeExtraction, Appeal];
        let gate_of = decent
            .into_iter()
            .map(|a| (a, Stage::Decent))
            .chain(fine.into_iter().map(|a| (a, Stage::Fine)))
            .collect();
        Self { gate_of, thresholds: Thresholds::default() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading quality model config: {0}")]
    Io(#[from] std::io::Error),
    #[error("quality model config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown quality attribute `{0}` in gates")]
    UnknownAttribute(String),
    #[error("attribute `{attribute}` gated at `{stage}`; gates must be `decent` or `fine`")]
    BadGate { attribute: String, stage: String },
    #[error("invalid thresholds: {0}")]
    Thresholds(String),
}

/// On-disk shape: `{ "gates": { "<attribute>": "decent" | "fine" }, "thresholds": { ... } }`.
/// Attributes not listed keep their default gate.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    gates: BTreeMap<String, String>,
    #[serde(default)]
    thresholds: Thresholds,
}

impl QualityModelConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let raw: ConfigFile = serde_json::from_str(text)?;
        let mut cfg = Self { thresholds: raw.thresholds, ..Self::default() };
        for (name, stage) in raw.gates {
            let attribute = name.parse::<QualityAttribute>().map_err(|_| ConfigError::UnknownAttribute(name.clone()))?;
            let stage = match stage.as_str() {
                "decent" => Stage::Decent,
                "fine" => Stage::Fine,
                _ => return Err(ConfigError::BadGate { attribute: name, stage }),
            };
            cfg.gate_of.insert(attribute, stage);
        }
        cfg.thresholds.validate().map_err(ConfigError::Thresholds)?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let file = ConfigFile {
            gates: self.gate_of.iter().map(|(a, s)| (a.as_str().to_string(), s.as_str().to_string())).collect(),
            thresholds: self.thresholds.clone(),
        };
        serde_json::to_string_pretty(&file).expect("config serializes")
    }

    /// Missing file means defaults.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        match std::fs::read_to_string(path) {
            Ok(text) => Self::from_json(&text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(e.into()),
        }
    }

    pub fn gate(&self, attr: QualityAttribute) -> Stage {
        self.gate_of.get(&attr).copied().unwrap_or(Stage::Fine)
    }
}

/// Everything the status rules look at for one snapshot.
#[derive(Debug, Clone, Copy)]
pub struct GateInputs<'a> {
    pub findings: &'a [Finding],
    pub overrides: &'a [Override],
    pub attestations: &'a [Attestation],
    pub content_hash: &'a ContentHash,
    /// Black-hat reviews in status Open or Reopened.
    pub open_black_hats: usize,
}

pub fn attribute_status(attr: QualityAttribute, inputs: &GateInputs<'_>) -> AttributeStatus {
    let mapped = || inputs.findings.iter().filter(move |f| f.attribute == attr);
    match attr.characteristic() {
        CharacteristicClass::Strong => {
            if mapped().next().is_some() {
                AttributeStatus::Violated
            } else {
                AttributeStatus::Satisfied
            }
        }
        CharacteristicClass::Medium => {
            if mapped().any(|f| !inputs.overrides.iter().any(|o| o.covers(f))) {
                AttributeStatus::Violated
            } else {
                AttributeStatus::Satisfied
            }
        }
        CharacteristicClass::Weak => {
            if attr == QualityAttribute::SemanticValidity && inputs.open_black_hats > 0 {
                return AttributeStatus::Violated;
            }
            // the latest attestation on this exact content wins
            let verdict = inputs
                .attestations
                .iter()
                .filter(|a| a.attribute == attr && &a.content_hash == inputs.content_hash)
                .max_by_key(|a| a.created_at)
                .map(|a| a.verdict);
            match verdict {
                Some(Verdict::Pass) => AttributeStatus::Satisfied,
                Some(Verdict::Fail) => AttributeStatus::Violated,
                None => AttributeStatus::PendingHuman,
            }
        }
    }
}

pub fn all_statuses(inputs: &GateInputs<'_>) -> BTreeMap<QualityAttribute, AttributeStatus> {
    QualityAttribute::ALL.into_iter().map(|a| (a, attribute_status(a, inputs))).collect()
}

/// Highest stage whose cumulative gate is fully satisfied. Attributes missing
/// from `statuses` count as unsatisfied.
pub fn evaluate_stage(statuses: &BTreeMap<QualityAttribute, AttributeStatus>, cfg: &QualityModelConfig) -> Stage {
    let blocked_at = QualityAttribute::ALL
        .into_iter()
        .filter(|a| statuses.get(a) != Some(&AttributeStatus::Satisfied))
        .map(|a| cfg.gate(a))
        .min();
    match blocked_at {
        None => Stage::Fine,
        Some(Stage::Vague) | Some(Stage::Decent) => Stage::Vague,
        Some(Stage::Fine) => Stage::Decent,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTransition {
    /// `None` on the first assessment of an entry.
    pub from: Option<Stage>,
    pub to: Stage,
    pub demoted: bool,
}

/// Stateless: the new stage never depends on the previous one, which only
/// determines `demoted`.
pub fn recompute_on_change(
    prev: Option<Stage>,
    statuses: &BTreeMap<QualityAttribute, AttributeStatus>,
    cfg: &QualityModelConfig,
) -> StageTransition {
    let to = evaluate_stage(statuses, cfg);
    StageTransition { from: prev, to, demoted: prev.is_some_and(|p| to < p) }
}
