//! The negotiation card: the per-dataset record of stakeholder agreements.

use std::fmt;

use crate::fraction::Fraction;
use crate::predicate::Predicate;
use crate::version::SemVer;

/// The six-section card. Sections that were absent in the source parse as
/// their empty defaults; the parser reports the omission separately.
#[derive(Debug, Clone, PartialEq)]
pub struct NegotiationCard {
    pub id: String,
    pub version: SemVer,
    pub objectives: Objectives,
    pub context: OperationalContext,
    pub ethics: Ethics,
    pub tooling: Tooling,
    pub qa: QaProtocol,
    pub governance: Governance,
}

impl NegotiationCard {
    /// A card with the given identity and all sections empty.
    pub fn empty(id: impl Into<String>, version: SemVer) -> Self {
        Self {
            id: id.into(),
            version,
            objectives: Objectives::default(),
            context: OperationalContext::default(),
            ethics: Ethics::default(),
            tooling: Tooling::default(),
            qa: QaProtocol::default(),
            governance: Governance::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Objectives {
    pub system: String,
    pub model: String,
    pub critical: String,
    pub downstream: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OperationalContext {
    pub operational_context: String,
    pub quotas: Vec<Quota>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ethics {
    pub anonymization_rules: Vec<String>,
    pub flag_rules: Vec<String>,
    pub compliance: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Tooling {
    pub tool_requirements: Vec<String>,
    pub calibration: Option<String>,
    pub taxonomy: Taxonomy,
    pub handoff: Option<Handoff>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Taxonomy {
    pub classes: Vec<ClassDef>,
    pub attributes: Vec<AttributeDef>,
}

impl Taxonomy {
    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeDef> {
        self.attributes.iter().find(|a| a.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDef {
    pub name: String,
    pub definition: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeDef {
    pub name: String,
    pub applies_to: Vec<String>,
    pub definition: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Handoff {
    pub format: String,
    pub batch_size: u64,
    pub cadence: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QaProtocol {
    pub thresholds: Vec<Threshold>,
    pub review_cadence: Option<String>,
    pub feedback_channels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Governance {
    pub owner: String,
    pub versioning_policy: String,
    pub distribution: String,
}

/// A representation-plan quota: a minimum fraction of frames or objects that
/// must satisfy the predicate. Quotas sharing a declared `group` split one
/// budget, so their minima may not sum past 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Quota {
    pub id: String,
    pub scope: QuotaScope,
    pub predicate: Predicate,
    pub min_fraction: Fraction,
    pub group: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuotaScope {
    /// Denominator: all delivered (non-excluded) frames.
    Frames,
    /// Denominator: objects whose class is in the filter list.
    Objects(Vec<String>),
}

/// A batch acceptance threshold from the QA protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub id: String,
    pub metric: MetricKind,
    pub classes: Vec<String>,
    pub min_value: Fraction,
    /// Minimum overlap for a ground-truth/prediction pair to count as a
    /// match. Defaults to 0.5 when the threshold does not set it.
    pub match_iou: f64,
    pub scope: Option<Predicate>,
}

pub const DEFAULT_MATCH_IOU: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Recall,
    Precision,
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Recall => "recall",
            MetricKind::Precision => "precision",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "recall" => Some(MetricKind::Recall),
            "precision" => Some(MetricKind::Precision),
            _ => None,
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}
