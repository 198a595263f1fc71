//! Scenario-based annotation requirements.
//!
//! Each requirement is one atomic rule: a stimulus (optionally with a
//! machine predicate), an optional context, exactly one response action, and
//! an acceptance criterion, all traced back to a card element. The four
//! mandatory parts are modeled as `Option` so that a malformed document can
//! still be represented after parse recovery; validation reports what is
//! missing.

use std::fmt;

use crate::predicate::{Literal, Predicate};
use crate::trace::TraceRef;

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationRequirement {
    pub req_id: String,
    pub scenario_type: ScenarioType,
    pub trace: Option<TraceRef>,
    pub stimulus: Option<Stimulus>,
    pub context: Option<ReqContext>,
    pub response: Option<Response>,
    pub rationale: Option<String>,
    pub acceptance: Option<Acceptance>,
    /// URI or path of the illustrating image; stored as an opaque reference.
    pub visual_example: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioType {
    Standard,
    Edge,
    Exception,
}

impl ScenarioType {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioType::Standard => "standard",
            ScenarioType::Edge => "edge",
            ScenarioType::Exception => "exception",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "standard" => Some(ScenarioType::Standard),
            "edge" => Some(ScenarioType::Edge),
            "exception" => Some(ScenarioType::Exception),
            _ => None,
        }
    }
}

impl fmt::Display for ScenarioType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// The "when": what triggers the rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Stimulus {
    pub text: String,
    pub when: Option<Predicate>,
}

/// The "given environment" in which the stimulus occurs.
#[derive(Debug, Clone, PartialEq)]
pub struct ReqContext {
    pub text: Option<String>,
    pub given: Option<Predicate>,
}

/// The "then": the single action the annotator must take.
#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub action: String,
    pub constraint: Option<String>,
    pub effect: Option<Effect>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Acceptance {
    pub text: String,
    /// Id of a QA threshold that verifies this requirement.
    pub metric_ref: Option<String>,
}

/// Machine-checkable classification of a response.
#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    AnnotateBox,
    SetAttribute { name: String, value: Literal },
    ExcludeFrame,
    FlagFrame { reason: String },
    Anonymize,
}

impl Effect {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Effect::AnnotateBox => "annotate_box",
            Effect::SetAttribute { .. } => "set_attribute",
            Effect::ExcludeFrame => "exclude_frame",
            Effect::FlagFrame { .. } => "flag_frame",
            Effect::Anonymize => "anonymize",
        }
    }

    /// Effects that remove data from the standard annotation flow; these are
    /// reserved for exception scenarios.
    pub fn is_exclusionary(&self) -> bool {
        matches!(
            self,
            Effect::ExcludeFrame | Effect::FlagFrame { .. } | Effect::Anonymize
        )
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Effect::AnnotateBox => write!(f, "annotate_box"),
            Effect::SetAttribute { name, value } => write!(f, "set_attribute({name}, {value})"),
            Effect::ExcludeFrame => write!(f, "exclude_frame"),
            Effect::FlagFrame { reason } => {
                write!(f, "flag_frame({})", crate::predicate::quote_string(reason))
            }
            Effect::Anonymize => write!(f, "anonymize"),
        }
    }
}
