//! Vertical trace references from requirements back to card fields.

use std::fmt;

use crate::predicate::quote_string;

/// The six sections of a negotiation card, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CardSection {
    Objectives,
    Context,
    Ethics,
    Tooling,
    Qa,
    Governance,
}

impl CardSection {
    pub const ALL: [CardSection; 6] = [
        CardSection::Objectives,
        CardSection::Context,
        CardSection::Ethics,
        CardSection::Tooling,
        CardSection::Qa,
        CardSection::Governance,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CardSection::Objectives => "objectives",
            CardSection::Context => "context",
            CardSection::Ethics => "ethics",
            CardSection::Tooling => "tooling",
            CardSection::Qa => "qa",
            CardSection::Governance => "governance",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        CardSection::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Human-readable title used in rendered reports.
    pub fn title(&self) -> &'static str {
        match self {
            CardSection::Objectives => "System & Model Objectives",
            CardSection::Context => "Operational Context & Representation Plan",
            CardSection::Ethics => "Ethical & Legal Constraints",
            CardSection::Tooling => "Tooling, Taxonomy & Hand-off",
            CardSection::Qa => "Quality Assurance & Feedback Protocol",
            CardSection::Governance => "Guideline Governance",
        }
    }
}

impl fmt::Display for CardSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// A link from a requirement to a card element, e.g.
/// `"AEB-URBAN"#tooling.taxonomy.classes.rider`.
///
/// The section is kept as raw text so an unknown section name survives
/// parsing and is reported as an unresolved trace rather than rejected
/// syntactically; [`TraceRef::section`] classifies it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRef {
    pub card_id: String,
    pub section_name: String,
    pub subpath: Vec<String>,
}

impl TraceRef {
    pub fn new(
        card_id: impl Into<String>,
        section_name: impl Into<String>,
        subpath: Vec<String>,
    ) -> Self {
        Self {
            card_id: card_id.into(),
            section_name: section_name.into(),
            subpath,
        }
    }

    /// The section, when the name is one of the six card sections.
    pub fn section(&self) -> Option<CardSection> {
        CardSection::from_name(&self.section_name)
    }
}

impl fmt::Display for TraceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", quote_string(&self.card_id), self.section_name)?;
        for part in &self.subpath {
            write!(f, ".{part}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn section_lookup_is_closed() {
        for section in CardSection::ALL {
            assert_eq!(CardSection::from_name(section.name()), Some(section));
        }
        assert_eq!(CardSection::from_name("safety"), None);
        assert_eq!(CardSection::from_name("Objectives"), None);
    }

    #[test]
    fn display_round_trips_subpath() {
        let t = TraceRef::new(
            "AEB-URBAN",
            "tooling",
            vec!["taxonomy".into(), "classes".into(), "rider".into()],
        );
        assert_eq!(t.to_string(), "\"AEB-URBAN\"#tooling.taxonomy.classes.rider");
    }
}
