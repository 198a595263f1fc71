//! The workspace: one card plus its requirement set, with source locations.

use std::collections::BTreeMap;

use crate::card::NegotiationCard;
use crate::requirement::AnnotationRequirement;
use crate::span::SourceSpan;
use crate::trace::{CardSection, TraceRef};
use crate::version::SemVer;

/// The unit all checks run over. Requirement order is preserved from the
/// source so reporting is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Workspace {
    /// `None` when the input declared no card; validation reports it.
    pub card: Option<NegotiationCard>,
    pub requirements: Vec<AnnotationRequirement>,
    /// Version of the requirement set. The notation has no separate
    /// declaration for it, so it equals the card version.
    pub spec_version: SemVer,
    /// Element key (`card:<id>`, `quota:<id>`, `threshold:<id>`,
    /// `attribute:<name>`, `class:<name>`, `req:<id>`) to source span.
    pub source_map: BTreeMap<String, SourceSpan>,
}

/// What a trace reference resolved to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceTarget {
    Section(CardSection),
    /// A scalar or list field of a section, e.g. `objectives.system`.
    Field(CardSection, String),
    Quota(String),
    Threshold(String),
    TaxonomyClass(String),
    TaxonomyAttribute(String),
}

impl Workspace {
    pub fn new(card: Option<NegotiationCard>) -> Self {
        let spec_version = card
            .as_ref()
            .map(|c| c.version)
            .unwrap_or(SemVer::new(0, 0, 0));
        Self {
            card,
            requirements: Vec::new(),
            spec_version,
            source_map: BTreeMap::new(),
        }
    }

    /// Span registered for an element key, or a synthetic span for
    /// workspaces built in memory.
    pub fn span_of(&self, key: &str) -> SourceSpan {
        self.source_map
            .get(key)
            .cloned()
            .unwrap_or_else(SourceSpan::synthetic)
    }

    /// Resolves a trace reference against this workspace. `None` means
    /// unresolved: foreign card id, unknown section name, or a subpath that
    /// names nothing. Diagnostics are the validator's job.
    pub fn resolve_trace(&self, trace: &TraceRef) -> Option<TraceTarget> {
        let card = self.card.as_ref()?;
        if trace.card_id != card.id {
            return None;
        }
        let section = trace.section()?;
        if trace.subpath.is_empty() {
            return Some(TraceTarget::Section(section));
        }
        let path: Vec<&str> = trace.subpath.iter().map(String::as_str).collect();
        let field = |name: &str| Some(TraceTarget::Field(section, name.to_string()));
        match section {
            CardSection::Objectives => match path[..] {
                ["system"] | ["model"] | ["critical"] | ["downstream"] => field(path[0]),
                _ => None,
            },
            CardSection::Context => match path[..] {
                ["operational_context"] => field(path[0]),
                ["quotas", id] => card
                    .context
                    .quotas
                    .iter()
                    .any(|q| q.id == id)
                    .then(|| TraceTarget::Quota(id.to_string())),
                _ => None,
            },
            CardSection::Ethics => match path[..] {
                ["anonymization_rules"] | ["flag_rules"] | ["compliance"] => field(path[0]),
                _ => None,
            },
            CardSection::Tooling => match path[..] {
                ["tool_requirements"] | ["calibration"] | ["taxonomy"] | ["handoff"] => {
                    field(path[0])
                }
                ["handoff", "format"] | ["handoff", "batch_size"] | ["handoff", "cadence"] => {
                    field(&path.join("."))
                }
                ["taxonomy", "classes", name] => card
                    .tooling
                    .taxonomy
                    .class(name)
                    .map(|c| TraceTarget::TaxonomyClass(c.name.clone())),
                ["taxonomy", "attributes", name] => card
                    .tooling
                    .taxonomy
                    .attribute(name)
                    .map(|a| TraceTarget::TaxonomyAttribute(a.name.clone())),
                _ => None,
            },
            CardSection::Qa => match path[..] {
                ["review_cadence"] | ["feedback_channels"] => field(path[0]),
                ["thresholds", id] => card
                    .qa
                    .thresholds
                    .iter()
                    .any(|t| t.id == id)
                    .then(|| TraceTarget::Threshold(id.to_string())),
                _ => None,
            },
            CardSection::Governance => match path[..] {
                ["owner"] | ["versioning_policy"] | ["distribution"] => field(path[0]),
                _ => None,
            },
        }
    }
}
