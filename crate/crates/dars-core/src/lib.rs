//! Domain model for data annotation requirements workspaces.
//!
//! A workspace couples one negotiation card (the strategic agreements for a
//! dataset: objectives, operational context and representation quotas, ethics
//! rules, tooling and taxonomy, QA thresholds, governance) with a set of
//! scenario-based annotation requirements. Everything in this crate is a pure
//! value type: parsing lives in `dars-syntax`, validation in `dars-check`,
//! batch auditing in `dars-audit`.
//!
//! All types are immutable after construction and safe to share across
//! threads; no operation here performs I/O.

pub mod card;
pub mod diag;
pub mod fraction;
pub mod predicate;
pub mod requirement;
pub mod span;
pub mod trace;
pub mod version;
pub mod workspace;

pub use card::{
    AttributeDef, ClassDef, Ethics, Governance, Handoff, MetricKind, NegotiationCard, Objectives,
    OperationalContext, QaProtocol, Quota, QuotaScope, Taxonomy, Threshold, Tooling,
};
pub use diag::{sort_diagnostics, Diagnostic, Severity};
pub use fraction::{fraction_from_decimal, fraction_to_decimal, percent_text, Fraction};
pub use predicate::{BboxField, CmpOp, EvalRecord, FieldPath, Literal, Operand, Predicate, Value};
pub use requirement::{
    Acceptance, AnnotationRequirement, Effect, ReqContext, Response, ScenarioType, Stimulus,
};
pub use span::SourceSpan;
pub use trace::{CardSection, TraceRef};
pub use version::{compare_semver, Bump, SemVer, SemVerError};
pub use workspace::{TraceTarget, Workspace};
