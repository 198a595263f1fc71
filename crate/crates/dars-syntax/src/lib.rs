//! Lexer, parser and canonical formatter for the `.dars` notation.
//!
//! The notation is brace-delimited: a document is a sequence of `card` and
//! `requirement` declarations. Parsing is lossless about problems — every
//! lexical or structural error becomes a [`dars_core::Diagnostic`] and the
//! parser recovers at the next recognizable anchor, so one run reports as
//! many independent findings as possible.

mod formatter;
mod lexer;
mod parser;
pub mod token;

pub use formatter::format_source;
pub use lexer::tokenize;
pub use parser::{parse_files, parse_source};

#[cfg(test)]
mod tests {
    use super::*;
    use dars_core::{
        CmpOp, Effect, FieldPath, Fraction, Literal, Operand, Predicate, QuotaScope, ScenarioType,
        SemVer, Severity,
    };

    const MINI: &str = r##"
card "AEB-URBAN" version 1.0 {
  objectives {
    system = "Enable AEB"
    model = "Detect road users"
    critical = "High recall"
    downstream = "Velocity priors"
  }
  context {
    operational_context = "Dense urban centers"
    quota wheelchair_users {
      scope = objects[pedestrian, rider]
      when = has(attr.wheelchair)
      min = 10%
    }
  }
  ethics {
    anonymization_rules = ["Blur faces"]
    flag_rules = ["Flag sensitive scenes"]
    compliance = ["Certified servers only"]
  }
  tooling {
    tool_requirements = ["2D boxes with attributes"]
    calibration = "Synchronized sensors"
    taxonomy {
      class pedestrian = "Any live person on foot"
      class rider = "Any person on a micromobility vehicle"
      attribute wheelchair applies [rider] = "Uses a wheelchair"
    }
    handoff {
      format = "ASAM OpenLABEL"
      batch_size = 1000
      cadence = "weekly"
    }
  }
  qa {
    threshold recall_rus {
      metric = recall
      classes = [pedestrian, rider]
      min = 99%
      match_iou = 0.5
      scope = distance_m < 50
    }
    review_cadence = "Weekly audit of 10% of assets"
    feedback_channels = ["Flag ambiguous frames"]
  }
  governance {
    owner = "Data team lead"
    versioning_policy = "Semantic versioning"
    distribution = "Central notifications"
  }
}

requirement Edge-1 type edge {
  trace = "AEB-URBAN"#context.quotas.wheelchair_users
  stimulus {
    text = "Wheelchair is visible"
    when = has(attr.wheelchair)
  }
  response {
    action = "Set wheelchair attribute label"
    effect = set_attribute(wheelchair, true)
  }
  rationale = "Velocity prior exception"
  acceptance {
    text = "Attribute present in audit"
    metric = recall_rus
  }
  visual = "visuals/edge-1.png"
}
"##;

    #[test]
    fn parses_the_mini_workspace_cleanly() {
        let (w, diags) = parse_source(MINI, "mini.dars");
        assert_eq!(diags, vec![], "expected a clean parse");
        let card = w.card.as_ref().expect("card");
        assert_eq!(card.id, "AEB-URBAN");
        assert_eq!(card.version, SemVer::new(1, 0, 0));
        assert_eq!(card.context.quotas.len(), 1);
        let quota = &card.context.quotas[0];
        assert_eq!(quota.min_fraction, Fraction::new(1, 10));
        assert_eq!(
            quota.scope,
            QuotaScope::Objects(vec!["pedestrian".into(), "rider".into()])
        );
        assert_eq!(card.qa.thresholds[0].min_value, Fraction::new(99, 100));
        assert_eq!(card.qa.thresholds[0].match_iou, 0.5);
        assert!(card.qa.thresholds[0].scope.is_some());
        assert_eq!(w.requirements.len(), 1);
        let req = &w.requirements[0];
        assert_eq!(req.scenario_type, ScenarioType::Edge);
        assert_eq!(
            req.response.as_ref().unwrap().effect,
            Some(Effect::SetAttribute {
                name: "wheelchair".into(),
                value: Literal::Bool(true)
            })
        );
        let trace = req.trace.as_ref().unwrap();
        assert_eq!(trace.card_id, "AEB-URBAN");
        assert_eq!(trace.section_name, "context");
        assert_eq!(trace.subpath, vec!["quotas", "wheelchair_users"]);
        assert_eq!(w.spec_version, SemVer::new(1, 0, 0));
    }

    #[test]
    fn missing_sections_get_one_e002_each() {
        let source = r#"card "X" version 1.0 { objectives { system = "s" } }"#;
        let (w, diags) = parse_source(source, "x.dars");
        assert!(w.card.is_some());
        let e002: Vec<_> = diags.iter().filter(|d| d.code == "E002").collect();
        assert_eq!(e002.len(), 5, "five missing sections: {diags:?}");
        for d in &e002 {
            assert_eq!(d.severity, Severity::Error);
        }
    }

    #[test]
    fn requirement_missing_trace_is_e002_on_that_requirement() {
        let source = r#"
requirement A-1 type standard {
  stimulus { text = "s" }
  response { action = "a" }
  acceptance { text = "t" }
}
"#;
        let (w, diags) = parse_source(source, "x.dars");
        assert_eq!(w.requirements.len(), 1);
        assert!(w.requirements[0].trace.is_none());
        let missing: Vec<_> = diags
            .iter()
            .filter(|d| d.code == "E002" && d.message.contains("trace"))
            .collect();
        assert_eq!(missing.len(), 1);
        assert_eq!(missing[0].span.line_start, 2);
    }

    #[test]
    fn empty_input_is_e003() {
        let (w, diags) = parse_source("", "empty.dars");
        assert!(w.card.is_none());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, "E003");
        // comments only is still empty
        let (_, diags) = parse_source("# nothing here\n", "empty.dars");
        assert_eq!(diags[0].code, "E003");
    }

    #[test]
    fn error_recovery_reports_independent_errors() {
        // three independently broken sections
        let source = r#"
card "X" version 1.0 {
  objectives { system = }
  context { operational_context = 42 }
  ethics { anonymization_rules = ["ok"] }
  tooling {
    taxonomy { class p = "ok" }
    handoff { format = "f" batch_size = 0 cadence = "c" }
  }
  qa { review_cadence = "ok" }
  governance { owner = }
}
"#;
        let (w, diags) = parse_source(source, "broken.dars");
        assert!(w.card.is_some());
        let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
        assert!(errors >= 3, "expected at least 3 errors, got {diags:#?}");
        // later valid content still parsed
        let card = w.card.unwrap();
        assert_eq!(card.ethics.anonymization_rules, vec!["ok".to_string()]);
        assert_eq!(card.qa.review_cadence.as_deref(), Some("ok"));
    }

    #[test]
    fn shuffled_sections_parse_and_format_canonically() {
        let shuffled = r#"
card "X" version 2.1 {
  governance { owner = "o" versioning_policy = "v" distribution = "d" }
  qa { review_cadence = "weekly" }
  tooling { taxonomy { } handoff { format = "f" batch_size = 10 cadence = "c" } }
  ethics { compliance = ["c"] }
  context { operational_context = "urban" }
  objectives { system = "s" model = "m" critical = "c" downstream = "d" }
}
"#;
        let (w, diags) = parse_source(shuffled, "x.dars");
        assert_eq!(diags, vec![]);
        let formatted = format_source(&w);
        let objectives_pos = formatted.find("objectives {").unwrap();
        let governance_pos = formatted.find("governance {").unwrap();
        assert!(objectives_pos < governance_pos, "{formatted}");
        let (w2, diags2) = parse_source(&formatted, "x.dars");
        assert_eq!(diags2, vec![]);
        assert_eq!(w2.card, w.card);
    }

    #[test]
    fn format_parse_round_trip_on_mini() {
        let (w, diags) = parse_source(MINI, "mini.dars");
        assert_eq!(diags, vec![]);
        let formatted = format_source(&w);
        let (w2, diags2) = parse_source(&formatted, "mini.dars");
        assert_eq!(diags2, vec![], "formatted text must re-parse cleanly:\n{formatted}");
        assert_eq!(w2.card, w.card);
        assert_eq!(w2.requirements, w.requirements);
        // idempotence
        assert_eq!(format_source(&w2), formatted);
    }

    #[test]
    fn duplicate_card_is_rejected_keeping_the_first() {
        let source = r#"
card "A" version 1.0 { objectives{} context{} ethics{} tooling{ taxonomy{} handoff{ format="f" batch_size=1 cadence="c" } } qa{} governance{} }
card "B" version 1.0 { objectives{} context{} ethics{} tooling{ taxonomy{} handoff{ format="f" batch_size=1 cadence="c" } } qa{} governance{} }
"#;
        let (w, diags) = parse_source(source, "two.dars");
        assert_eq!(w.card.unwrap().id, "A");
        assert!(diags.iter().any(|d| d.code == "E001" && d.message.contains("duplicate card")));
    }

    #[test]
    fn multi_file_workspace_merges_card_and_requirements() {
        let card_file = r#"card "X" version 1.0 { objectives{} context{} ethics{} tooling{ taxonomy{} handoff{ format="f" batch_size=1 cadence="c" } } qa{} governance{} }"#;
        let req_file = r##"
requirement A-1 type standard {
  trace = "X"#qa
  stimulus { text = "s" }
  response { action = "a" }
  acceptance { text = "t" }
}
"##;
        let (w, diags) = parse_files(&[
            ("card.dars".to_string(), card_file.to_string()),
            ("reqs.dars".to_string(), req_file.to_string()),
        ]);
        assert_eq!(diags, vec![]);
        assert!(w.card.is_some());
        assert_eq!(w.requirements.len(), 1);
        assert_eq!(w.source_map["req#0"].file, "reqs.dars");
    }

    #[test]
    fn predicate_grammar_with_precedence_and_percent() {
        let source = r##"
requirement A-1 type standard {
  trace = "X"#qa
  stimulus {
    text = "s"
    when = class == "rider" and occlusion > 50% or not has(meta.night)
  }
  response { action = "a" }
  acceptance { text = "t" }
}
"##;
        let (w, diags) = parse_source(source, "p.dars");
        assert_eq!(diags, vec![]);
        let when = w.requirements[0].stimulus.as_ref().unwrap().when.clone().unwrap();
        // or at the top, and below it
        let Predicate::Or(parts) = &when else {
            panic!("expected or at the top: {when}")
        };
        assert_eq!(parts.len(), 2);
        assert!(matches!(parts[0], Predicate::And(_)));
        assert!(matches!(parts[1], Predicate::Not(_)));
        let Predicate::And(and_parts) = &parts[0] else { unreachable!() };
        assert_eq!(
            and_parts[1],
            Predicate::Cmp {
                op: CmpOp::Gt,
                lhs: Operand::Field(FieldPath::Occlusion),
                rhs: Operand::Literal(Literal::Percent(Fraction::new(1, 2))),
            }
        );
    }

    #[test]
    fn unconventional_trace_section_survives_parsing() {
        let source = r##"
requirement A-1 type standard {
  trace = "X"#safety
  stimulus { text = "s" }
  response { action = "a" }
  acceptance { text = "t" }
}
"##;
        let (w, diags) = parse_source(source, "p.dars");
        assert_eq!(diags, vec![]);
        let trace = w.requirements[0].trace.as_ref().unwrap();
        assert_eq!(trace.section_name, "safety");
        assert_eq!(trace.section(), None);
    }
}
