//! Canonical formatter: deterministic layout with two-space indent, one
//! entry per line, card sections in their fixed order and requirement fields
//! in template row order. Re-parsing formatted output reproduces the same
//! workspace structure.

use std::fmt::Write;

use dars_core::predicate::quote_string;
use dars_core::{
    percent_text, AnnotationRequirement, NegotiationCard, Quota, QuotaScope, Threshold, Workspace,
};

pub fn format_source(workspace: &Workspace) -> String {
    let mut out = String::new();
    if let Some(card) = &workspace.card {
        format_card(&mut out, card);
    }
    for (i, req) in workspace.requirements.iter().enumerate() {
        if workspace.card.is_some() || i > 0 {
            out.push('\n');
        }
        format_requirement(&mut out, req);
    }
    out
}

fn line(out: &mut String, indent: usize, text: &str) {
    for _ in 0..indent {
        out.push_str("  ");
    }
    out.push_str(text);
    out.push('\n');
}

fn kv(out: &mut String, indent: usize, key: &str, value: &str) {
    line(out, indent, &format!("{key} = {value}"));
}

fn kv_string(out: &mut String, indent: usize, key: &str, value: &str) {
    kv(out, indent, key, &quote_string(value));
}

fn kv_string_list(out: &mut String, indent: usize, key: &str, values: &[String]) {
    if values.is_empty() {
        return;
    }
    let quoted: Vec<String> = values.iter().map(|v| quote_string(v)).collect();
    kv(out, indent, key, &format!("[{}]", quoted.join(", ")));
}

fn format_card(out: &mut String, card: &NegotiationCard) {
    line(
        out,
        0,
        &format!("card {} version {} {{", quote_string(&card.id), card.version),
    );

    line(out, 1, "objectives {");
    for (key, value) in [
        ("system", &card.objectives.system),
        ("model", &card.objectives.model),
        ("critical", &card.objectives.critical),
        ("downstream", &card.objectives.downstream),
    ] {
        if !value.is_empty() {
            kv_string(out, 2, key, value);
        }
    }
    line(out, 1, "}");

    line(out, 1, "context {");
    if !card.context.operational_context.is_empty() {
        kv_string(out, 2, "operational_context", &card.context.operational_context);
    }
    for quota in &card.context.quotas {
        format_quota(out, quota);
    }
    line(out, 1, "}");

    line(out, 1, "ethics {");
    kv_string_list(out, 2, "anonymization_rules", &card.ethics.anonymization_rules);
    kv_string_list(out, 2, "flag_rules", &card.ethics.flag_rules);
    kv_string_list(out, 2, "compliance", &card.ethics.compliance);
    line(out, 1, "}");

    line(out, 1, "tooling {");
    kv_string_list(out, 2, "tool_requirements", &card.tooling.tool_requirements);
    if let Some(calibration) = &card.tooling.calibration {
        kv_string(out, 2, "calibration", calibration);
    }
    line(out, 2, "taxonomy {");
    for class in &card.tooling.taxonomy.classes {
        kv(
            out,
            3,
            &format!("class {}", class.name),
            &quote_string(&class.definition),
        );
    }
    for attr in &card.tooling.taxonomy.attributes {
        kv(
            out,
            3,
            &format!("attribute {} applies [{}]", attr.name, attr.applies_to.join(" ")),
            &quote_string(&attr.definition),
        );
    }
    line(out, 2, "}");
    if let Some(handoff) = &card.tooling.handoff {
        line(out, 2, "handoff {");
        kv_string(out, 3, "format", &handoff.format);
        kv(out, 3, "batch_size", &handoff.batch_size.to_string());
        kv_string(out, 3, "cadence", &handoff.cadence);
        line(out, 2, "}");
    }
    line(out, 1, "}");

    line(out, 1, "qa {");
    for threshold in &card.qa.thresholds {
        format_threshold(out, threshold);
    }
    if let Some(cadence) = &card.qa.review_cadence {
        kv_string(out, 2, "review_cadence", cadence);
    }
    kv_string_list(out, 2, "feedback_channels", &card.qa.feedback_channels);
    line(out, 1, "}");

    line(out, 1, "governance {");
    for (key, value) in [
        ("owner", &card.governance.owner),
        ("versioning_policy", &card.governance.versioning_policy),
        ("distribution", &card.governance.distribution),
    ] {
        if !value.is_empty() {
            kv_string(out, 2, key, value);
        }
    }
    line(out, 1, "}");

    line(out, 0, "}");
}

fn format_quota(out: &mut String, quota: &Quota) {
    line(out, 2, &format!("quota {} {{", quota.id));
    let scope = match &quota.scope {
        QuotaScope::Frames => "frames".to_string(),
        QuotaScope::Objects(classes) => format!("objects[{}]", classes.join(", ")),
    };
    kv(out, 3, "scope", &scope);
    kv(out, 3, "when", &quota.predicate.to_string());
    kv(out, 3, "min", &percent_text(&quota.min_fraction));
    if let Some(group) = &quota.group {
        kv(out, 3, "group", group);
    }
    line(out, 2, "}");
}

fn format_threshold(out: &mut String, threshold: &Threshold) {
    line(out, 2, &format!("threshold {} {{", threshold.id));
    kv(out, 3, "metric", threshold.metric.name());
    kv(out, 3, "classes", &format!("[{}]", threshold.classes.join(", ")));
    kv(out, 3, "min", &percent_text(&threshold.min_value));
    let mut iou = String::new();
    write!(iou, "{}", threshold.match_iou).unwrap();
    kv(out, 3, "match_iou", &iou);
    if let Some(scope) = &threshold.scope {
        kv(out, 3, "scope", &scope.to_string());
    }
    line(out, 2, "}");
}

fn format_requirement(out: &mut String, req: &AnnotationRequirement) {
    line(
        out,
        0,
        &format!("requirement {} type {} {{", req.req_id, req.scenario_type),
    );
    if let Some(trace) = &req.trace {
        kv(out, 1, "trace", &trace.to_string());
    }
    if let Some(stimulus) = &req.stimulus {
        line(out, 1, "stimulus {");
        kv_string(out, 2, "text", &stimulus.text);
        if let Some(when) = &stimulus.when {
            kv(out, 2, "when", &when.to_string());
        }
        line(out, 1, "}");
    }
    if let Some(context) = &req.context {
        line(out, 1, "context {");
        if let Some(text) = &context.text {
            kv_string(out, 2, "text", text);
        }
        if let Some(given) = &context.given {
            kv(out, 2, "given", &given.to_string());
        }
        line(out, 1, "}");
    }
    if let Some(response) = &req.response {
        line(out, 1, "response {");
        kv_string(out, 2, "action", &response.action);
        if let Some(constraint) = &response.constraint {
            kv_string(out, 2, "constraint", constraint);
        }
        if let Some(effect) = &response.effect {
            kv(out, 2, "effect", &effect.to_string());
        }
        line(out, 1, "}");
    }
    if let Some(rationale) = &req.rationale {
        kv_string(out, 1, "rationale", rationale);
    }
    if let Some(acceptance) = &req.acceptance {
        line(out, 1, "acceptance {");
        kv_string(out, 2, "text", &acceptance.text);
        if let Some(metric) = &acceptance.metric_ref {
            kv(out, 2, "metric", metric);
        }
        line(out, 1, "}");
    }
    if let Some(visual) = &req.visual_example {
        kv_string(out, 1, "visual", visual);
    }
    line(out, 0, "}");
}
