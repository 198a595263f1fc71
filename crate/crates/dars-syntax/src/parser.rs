//! Recursive-descent parser with panic-mode recovery.
//!
//! Parsing never aborts: every problem becomes a diagnostic and the parser
//! skips ahead to the next recognizable anchor (a top-level keyword, a card
//! section name, or a requirement field). Missing mandatory card sections and
//! requirement fields are reported as `E002` and the model carries the gap so
//! later validation can still run over the rest.

use std::collections::BTreeMap;

use dars_core::{
    fraction_from_decimal, AnnotationRequirement, AttributeDef, BboxField, ClassDef, CmpOp,
    Diagnostic, Effect, FieldPath, Fraction, Literal, NegotiationCard, Operand, Predicate, Quota,
    QuotaScope, ReqContext, Response, ScenarioType, SemVer, SourceSpan, Stimulus, Threshold,
    TraceRef, Workspace, {Acceptance, MetricKind},
};

use crate::lexer::tokenize;
use crate::token::{Keyword, Token, TokenKind};

const SECTION_NAMES: [&str; 6] = ["objectives", "context", "ethics", "tooling", "qa", "governance"];
const REQ_FIELDS: [&str; 6] = ["stimulus", "context", "response", "rationale", "acceptance", "visual"];

/// Parses one source file into a workspace plus diagnostics.
pub fn parse_source(source: &str, file: &str) -> (Workspace, Vec<Diagnostic>) {
    parse_files(&[(file.to_string(), source.to_string())])
}

/// Parses several files into a single workspace. The card may live in any
/// file; requirement order follows input order.
pub fn parse_files(inputs: &[(String, String)]) -> (Workspace, Vec<Diagnostic>) {
    let mut diagnostics = Vec::new();
    let mut card: Option<NegotiationCard> = None;
    let mut card_span: Option<SourceSpan> = None;
    let mut requirements = Vec::new();
    let mut source_map = BTreeMap::new();

    for (file, source) in inputs {
        let (tokens, lex_diags) = tokenize(source, file);
        diagnostics.extend(lex_diags);
        let mut parser = Parser {
            tokens,
            pos: 0,
            file,
            diagnostics: &mut diagnostics,
            source_map: &mut source_map,
            req_base: requirements.len(),
        };
        let (file_card, file_reqs) = parser.document();
        if let Some((parsed, span)) = file_card {
            if card.is_some() {
                let mut diag = Diagnostic::error(
                    "E001",
                    span,
                    "duplicate card declaration; a workspace holds exactly one card",
                );
                if let Some(first) = &card_span {
                    diag = diag.with_related(first.clone(), "first card declared here");
                }
                diagnostics.push(diag);
            } else {
                card_span = Some(span);
                card = Some(parsed);
            }
        }
        requirements.extend(file_reqs);
    }

    let mut workspace = Workspace::new(card);
    workspace.requirements = requirements;
    workspace.source_map = source_map;
    (workspace, diagnostics)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    file: &'a str,
    diagnostics: &'a mut Vec<Diagnostic>,
    source_map: &'a mut BTreeMap<String, SourceSpan>,
    /// Requirement index offset for multi-file parses.
    req_base: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn kind(&self) -> TokenKind {
        self.peek().kind
    }

    fn advance(&mut self) -> Token {
        let token = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        token
    }

    fn at_ident(&self, text: &str) -> bool {
        self.kind() == TokenKind::Ident && self.peek().text == text
    }

    fn error(&mut self, span: SourceSpan, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic::error("E001", span, message));
    }

    fn error_here(&mut self, message: impl Into<String>) {
        let span = self.peek().span.clone();
        self.error(span, message);
    }

    fn missing(&mut self, span: SourceSpan, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic::error("E002", span, message));
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Option<Token> {
        if self.kind() == kind {
            return Some(self.advance());
        }
        let found = self.peek().describe();
        self.error_here(format!("expected {what}, found {found}"));
        None
    }

    fn expect_string(&mut self, what: &str) -> Option<String> {
        self.expect(TokenKind::Str, what).map(|t| t.text)
    }

    /// `= "value"` after a key.
    fn eq_string(&mut self, key: &str) -> Option<String> {
        self.expect(TokenKind::Eq, &format!("`=` after `{key}`"))?;
        self.expect_string("a string value")
    }

    /// `= ["a", "b"]`, also accepting a bare string as a one-element list.
    fn eq_string_list(&mut self, key: &str) -> Option<Vec<String>> {
        self.expect(TokenKind::Eq, &format!("`=` after `{key}`"))?;
        if self.kind() == TokenKind::Str {
            return Some(vec![self.advance().text]);
        }
        self.expect(TokenKind::LBracket, "`[` opening a string list")?;
        let mut items = Vec::new();
        loop {
            match self.kind() {
                TokenKind::RBracket => {
                    self.advance();
                    break;
                }
                TokenKind::Str => {
                    items.push(self.advance().text);
                    if self.kind() == TokenKind::Comma {
                        self.advance();
                    }
                }
                TokenKind::Eof => {
                    self.error_here("unterminated string list");
                    break;
                }
                _ => {
                    let found = self.peek().describe();
                    self.error_here(format!("expected a string in list, found {found}"));
                    self.advance();
                }
            }
        }
        Some(items)
    }

    /// `[a, b]` or `[a b]`: identifiers with optional commas.
    fn ident_list(&mut self) -> Option<Vec<String>> {
        self.expect(TokenKind::LBracket, "`[` opening a name list")?;
        let mut items = Vec::new();
        loop {
            match self.kind() {
                TokenKind::RBracket => {
                    self.advance();
                    break;
                }
                TokenKind::Ident => {
                    items.push(self.advance().text);
                    if self.kind() == TokenKind::Comma {
                        self.advance();
                    }
                }
                TokenKind::Eof => {
                    self.error_here("unterminated name list");
                    break;
                }
                _ => {
                    let found = self.peek().describe();
                    self.error_here(format!("expected a name in list, found {found}"));
                    self.advance();
                }
            }
        }
        Some(items)
    }

    /// Skips tokens until a top-level `card`/`requirement` keyword or EOF.
    fn recover_top_level(&mut self) {
        let mut depth: i32 = 0;
        loop {
            match self.kind() {
                TokenKind::Eof => return,
                TokenKind::Keyword(Keyword::Card) | TokenKind::Keyword(Keyword::Requirement)
                    if depth <= 0 =>
                {
                    return;
                }
                TokenKind::LBrace => {
                    depth += 1;
                    self.advance();
                }
                TokenKind::RBrace => {
                    depth -= 1;
                    self.advance();
                }
                _ => {
                    self.advance();
                }
            }
        }
    }

    /// Skips tokens until one of `anchors` (an identifier or keyword text) at
    /// the current brace depth, or the enclosing `}` (not consumed), or EOF.
    fn recover_in_block(&mut self, anchors: &[&str]) {
        let mut depth: i32 = 0;
        loop {
            match self.kind() {
                TokenKind::Eof => return,
                TokenKind::RBrace if depth == 0 => return,
                TokenKind::LBrace => {
                    depth += 1;
                    self.advance();
                }
                TokenKind::RBrace => {
                    depth -= 1;
                    self.advance();
                }
                _ if depth == 0 && anchors.contains(&self.peek().text.as_str()) => return,
                _ => {
                    self.advance();
                }
            }
        }
    }

    fn register(&mut self, key: String, span: SourceSpan) {
        self.source_map.entry(key).or_insert(span);
    }

    // ------------------------------------------------------------------
    // document
    // ------------------------------------------------------------------

    fn document(&mut self) -> (Option<(NegotiationCard, SourceSpan)>, Vec<AnnotationRequirement>) {
        let mut card = None;
        let mut requirements = Vec::new();
        let mut saw_tokens = false;
        loop {
            match self.kind() {
                TokenKind::Eof => break,
                TokenKind::Keyword(Keyword::Card) => {
                    saw_tokens = true;
                    if let Some(parsed) = self.card() {
                        if card.is_none() {
                            card = Some(parsed);
                        } else {
                            let (_, span) = parsed;
                            let mut diag = Diagnostic::error(
                                "E001",
                                span,
                                "duplicate card declaration; a workspace holds exactly one card",
                            );
                            let (_, first_span): &(NegotiationCard, SourceSpan) =
                                card.as_ref().unwrap();
                            diag = diag.with_related(first_span.clone(), "first card declared here");
                            self.diagnostics.push(diag);
                        }
                    }
                }
                TokenKind::Keyword(Keyword::Requirement) => {
                    saw_tokens = true;
                    let index = self.req_base + requirements.len();
                    if let Some(req) = self.requirement(index) {
                        requirements.push(req);
                    }
                }
                _ => {
                    saw_tokens = true;
                    let found = self.peek().describe();
                    self.error_here(format!("expected `card` or `requirement`, found {found}"));
                    self.advance();
                    self.recover_top_level();
                }
            }
        }
        if card.is_none() && requirements.is_empty() && !saw_tokens {
            self.diagnostics.push(Diagnostic::error(
                "E003",
                SourceSpan::point(self.file, 1, 1),
                "empty document: no card or requirement declared",
            ));
        }
        (card, requirements)
    }

    // ------------------------------------------------------------------
    // card
    // ------------------------------------------------------------------

    fn card(&mut self) -> Option<(NegotiationCard, SourceSpan)> {
        let kw = self.advance();
        let id = match self.expect_string("the card id string after `card`") {
            Some(id) => id,
            None => {
                self.recover_top_level();
                return None;
            }
        };
        if !self.at_ident("version") {
            let found = self.peek().describe();
            self.error_here(format!("expected `version` after the card id, found {found}"));
            self.recover_top_level();
            return None;
        }
        self.advance();
        let version_token = self.advance();
        let version = match version_token.kind {
            TokenKind::Number | TokenKind::SemVer => {
                match SemVer::parse(&version_token.text) {
                    Ok(v) => v,
                    Err(err) => {
                        self.error(version_token.span.clone(), format!("invalid version: {err}"));
                        SemVer::new(0, 0, 0)
                    }
                }
            }
            _ => {
                self.error(
                    version_token.span.clone(),
                    format!("expected a version number, found {}", version_token.describe()),
                );
                SemVer::new(0, 0, 0)
            }
        };
        let header_span = kw.span.merge(&version_token.span);
        self.register(format!("card:{id}"), header_span.clone());

        let mut card = NegotiationCard::empty(id, version);
        if self.expect(TokenKind::LBrace, "`{` opening the card body").is_none() {
            self.recover_top_level();
            return Some((card, header_span));
        }

        let mut seen: Vec<&'static str> = Vec::new();
        loop {
            match self.kind() {
                TokenKind::RBrace => {
                    self.advance();
                    break;
                }
                TokenKind::Eof => {
                    self.error_here("unexpected end of file inside card body");
                    break;
                }
                TokenKind::Ident if SECTION_NAMES.contains(&self.peek().text.as_str()) => {
                    let name = self.peek().text.clone();
                    let span = self.peek().span.clone();
                    let duplicate = seen.iter().any(|s| *s == name);
                    if duplicate {
                        self.error(span, format!("duplicate card section `{name}`"));
                        // parse into scratch to keep the token stream aligned
                        let mut scratch = NegotiationCard::empty(&card.id, version);
                        self.section(&name, &mut scratch);
                    } else {
                        seen.push(SECTION_NAMES.iter().find(|s| **s == name).unwrap());
                        self.section(&name, &mut card);
                    }
                }
                _ => {
                    let found = self.peek().describe();
                    self.error_here(format!(
                        "expected a card section (objectives, context, ethics, tooling, qa, governance), found {found}"
                    ));
                    self.advance();
                    self.recover_in_block(&SECTION_NAMES);
                }
            }
        }

        for name in SECTION_NAMES {
            if !seen.contains(&name) {
                self.missing(
                    header_span.clone(),
                    format!("card `{}` is missing mandatory section `{name}`", card.id),
                );
            }
        }
        Some((card, header_span))
    }

    fn section(&mut self, name: &str, card: &mut NegotiationCard) {
        self.advance(); // section name
        if self
            .expect(TokenKind::LBrace, &format!("`{{` opening section `{name}`"))
            .is_none()
        {
            self.recover_in_block(&SECTION_NAMES);
            return;
        }
        match name {
            "objectives" => self.objectives(card),
            "context" => self.context_section(card),
            "ethics" => self.ethics(card),
            "tooling" => self.tooling(card),
            "qa" => self.qa(card),
            "governance" => self.governance(card),
            _ => unreachable!("section dispatch"),
        }
    }

    /// Shared loop for `key = value` section bodies. `handle` returns false
    /// when the key is not recognized.
    fn kv_body(&mut self, section: &str, keys: &[&str], mut handle: impl FnMut(&mut Self, &str)) {
        loop {
            match self.kind() {
                TokenKind::RBrace => {
                    self.advance();
                    return;
                }
                TokenKind::Eof => {
                    self.error_here(format!("unexpected end of file in section `{section}`"));
                    return;
                }
                TokenKind::Ident if keys.contains(&self.peek().text.as_str()) => {
                    let key = self.advance().text;
                    handle(self, &key);
                }
                _ => {
                    let found = self.peek().describe();
                    self.error_here(format!("unknown entry in section `{section}`: {found}"));
                    self.advance();
                    self.recover_in_block(keys);
                }
            }
        }
    }

    fn set_once(
        &mut self,
        slot: &mut String,
        key: &str,
        section: &str,
        span: SourceSpan,
        value: Option<String>,
    ) {
        let Some(value) = value else { return };
        if slot.is_empty() {
            *slot = value;
        } else {
            self.error(span, format!("duplicate key `{key}` in section `{section}`"));
        }
    }

    fn objectives(&mut self, card: &mut NegotiationCard) {
        let keys = ["system", "model", "critical", "downstream"];
        let mut obj = std::mem::take(&mut card.objectives);
        self.kv_body("objectives", &keys, |p, key| {
            let span = p.peek().span.clone();
            let value = p.eq_string(key);
            let slot = match key {
                "system" => &mut obj.system,
                "model" => &mut obj.model,
                "critical" => &mut obj.critical,
                _ => &mut obj.downstream,
            };
            p.set_once(slot, key, "objectives", span, value);
        });
        card.objectives = obj;
    }

    fn context_section(&mut self, card: &mut NegotiationCard) {
        loop {
            match self.kind() {
                TokenKind::RBrace => {
                    self.advance();
                    return;
                }
                TokenKind::Eof => {
                    self.error_here("unexpected end of file in section `context`");
                    return;
                }
                TokenKind::Keyword(Keyword::Quota) => {
                    if let Some(quota) = self.quota() {
                        card.context.quotas.push(quota);
                    }
                }
                TokenKind::Ident if self.peek().text == "operational_context" => {
                    let span = self.advance().span;
                    let value = self.eq_string("operational_context");
                    let mut slot = std::mem::take(&mut card.context.operational_context);
                    self.set_once(&mut slot, "operational_context", "context", span, value);
                    card.context.operational_context = slot;
                }
                _ => {
                    let found = self.peek().describe();
                    self.error_here(format!("unknown entry in section `context`: {found}"));
                    self.advance();
                    self.recover_in_block(&["operational_context", "quota"]);
                }
            }
        }
    }

    fn quota(&mut self) -> Option<Quota> {
        self.advance(); // quota keyword
        let id_token = self.expect(TokenKind::Ident, "a quota id")?;
        let id = id_token.text;
        self.register(format!("quota:{id}"), id_token.span.clone());
        self.expect(TokenKind::LBrace, "`{` opening the quota body")?;

        let mut scope = None;
        let mut predicate = None;
        let mut min_fraction = None;
        let mut group = None;
        loop {
            match self.kind() {
                TokenKind::RBrace => {
                    self.advance();
                    break;
                }
                TokenKind::Eof => {
                    self.error_here(format!("unexpected end of file in quota `{id}`"));
                    break;
                }
                TokenKind::Keyword(Keyword::When) => {
                    self.advance();
                    if self.expect(TokenKind::Eq, "`=` after `when`").is_some() {
                        predicate = self.predicate();
                    }
                }
                TokenKind::Ident if self.peek().text == "scope" => {
                    self.advance();
                    if self.expect(TokenKind::Eq, "`=` after `scope`").is_none() {
                        continue;
                    }
                    if self.at_ident("frames") {
                        self.advance();
                        scope = Some(QuotaScope::Frames);
                    } else if self.at_ident("objects") {
                        self.advance();
                        scope = self.ident_list().map(QuotaScope::Objects);
                    } else {
                        let found = self.peek().describe();
                        self.error_here(format!(
                            "expected `frames` or `objects[...]` as quota scope, found {found}"
                        ));
                    }
                }
                TokenKind::Ident if self.peek().text == "min" => {
                    self.advance();
                    if self.expect(TokenKind::Eq, "`=` after `min`").is_some() {
                        min_fraction = self.percent_value("quota minimum");
                    }
                }
                TokenKind::Ident if self.peek().text == "group" => {
                    self.advance();
                    if self.expect(TokenKind::Eq, "`=` after `group`").is_some() {
                        group = self.expect(TokenKind::Ident, "a group name").map(|t| t.text);
                    }
                }
                _ => {
                    let found = self.peek().describe();
                    self.error_here(format!("unknown entry in quota `{id}`: {found}"));
                    self.advance();
                    self.recover_in_block(&["scope", "when", "min", "group"]);
                }
            }
        }

        let span = self.source_map[&format!("quota:{id}")].clone();
        for (slot, field) in [
            (scope.is_none(), "scope"),
            (predicate.is_none(), "when"),
            (min_fraction.is_none(), "min"),
        ] {
            if slot {
                self.missing(span.clone(), format!("quota `{id}` is missing `{field}`"));
            }
        }
        Some(Quota {
            id,
            scope: scope?,
            predicate: predicate?,
            min_fraction: min_fraction?,
            group,
        })
    }

    fn percent_value(&mut self, what: &str) -> Option<Fraction> {
        let token = self.expect(TokenKind::Percent, &format!("a percent literal for {what}"))?;
        let Some(digits) = fraction_from_decimal(&token.text) else {
            self.error(token.span, format!("malformed percent literal for {what}"));
            return None;
        };
        let fraction = digits / Fraction::from_integer(100);
        if fraction > Fraction::from_integer(1) {
            self.error(
                token.span,
                format!("{what} must be between 0% and 100%, got {}%", token.text),
            );
        }
        Some(fraction)
    }

    fn ethics(&mut self, card: &mut NegotiationCard) {
        let keys = ["anonymization_rules", "flag_rules", "compliance"];
        loop {
            match self.kind() {
                TokenKind::RBrace => {
                    self.advance();
                    return;
                }
                TokenKind::Eof => {
                    self.error_here("unexpected end of file in section `ethics`");
                    return;
                }
                TokenKind::Ident if keys.contains(&self.peek().text.as_str()) => {
                    let key = self.advance().text;
                    if let Some(values) = self.eq_string_list(&key) {
                        let slot = match key.as_str() {
                            "anonymization_rules" => &mut card.ethics.anonymization_rules,
                            "flag_rules" => &mut card.ethics.flag_rules,
                            _ => &mut card.ethics.compliance,
                        };
                        slot.extend(values);
                    }
                }
                _ => {
                    let found = self.peek().describe();
                    self.error_here(format!("unknown entry in section `ethics`: {found}"));
                    self.advance();
                    self.recover_in_block(&keys);
                }
            }
        }
    }

    fn tooling(&mut self, card: &mut NegotiationCard) {
        let mut saw_taxonomy = false;
        let mut saw_handoff = false;
        let section_span = self.peek().span.clone();
        loop {
            match self.kind() {
                TokenKind::RBrace => {
                    self.advance();
                    break;
                }
                TokenKind::Eof => {
                    self.error_here("unexpected end of file in section `tooling`");
                    break;
                }
                TokenKind::Ident if self.peek().text == "tool_requirements" => {
                    self.advance();
                    if let Some(values) = self.eq_string_list("tool_requirements") {
                        card.tooling.tool_requirements.extend(values);
                    }
                }
                TokenKind::Ident if self.peek().text == "calibration" => {
                    self.advance();
                    card.tooling.calibration = self.eq_string("calibration");
                }
                TokenKind::Ident if self.peek().text == "taxonomy" => {
                    saw_taxonomy = true;
                    self.advance();
                    if self.expect(TokenKind::LBrace, "`{` opening `taxonomy`").is_some() {
                        self.taxonomy(card);
                    }
                }
                TokenKind::Ident if self.peek().text == "handoff" => {
                    saw_handoff = true;
                    self.advance();
                    if self.expect(TokenKind::LBrace, "`{` opening `handoff`").is_some() {
                        self.handoff(card);
                    }
                }
                _ => {
                    let found = self.peek().describe();
                    self.error_here(format!("unknown entry in section `tooling`: {found}"));
                    self.advance();
                    self.recover_in_block(&["tool_requirements", "calibration", "taxonomy", "handoff"]);
                }
            }
        }
        if !saw_taxonomy {
            self.missing(section_span.clone(), "tooling section is missing `taxonomy`");
        }
        if !saw_handoff {
            self.missing(section_span, "tooling section is missing `handoff`");
        }
    }

    fn taxonomy(&mut self, card: &mut NegotiationCard) {
        loop {
            match self.kind() {
                TokenKind::RBrace => {
                    self.advance();
                    return;
                }
                TokenKind::Eof => {
                    self.error_here("unexpected end of file in `taxonomy`");
                    return;
                }
                TokenKind::Ident if self.peek().text == "class" => {
                    self.advance();
                    let Some(name_token) = self.expect(TokenKind::Ident, "a class name") else {
                        self.recover_in_block(&["class", "attribute"]);
                        continue;
                    };
                    self.expect(TokenKind::Eq, "`=` after the class name");
                    let definition = self
                        .expect_string("the class definition string")
                        .unwrap_or_default();
                    let taxonomy = &mut card.tooling.taxonomy;
                    if taxonomy.class(&name_token.text).is_some() {
                        self.error(
                            name_token.span,
                            format!("duplicate class `{}` in taxonomy", name_token.text),
                        );
                    } else {
                        self.register(format!("class:{}", name_token.text), name_token.span.clone());
                        taxonomy.classes.push(ClassDef {
                            name: name_token.text,
                            definition,
                        });
                    }
                }
                TokenKind::Ident if self.peek().text == "attribute" => {
                    self.advance();
                    let Some(name_token) = self.expect(TokenKind::Ident, "an attribute name") else {
                        self.recover_in_block(&["class", "attribute"]);
                        continue;
                    };
                    if self.at_ident("applies") {
                        self.advance();
                    } else {
                        let found = self.peek().describe();
                        self.error_here(format!(
                            "expected `applies` after the attribute name, found {found}"
                        ));
                    }
                    let applies_to = self.ident_list().unwrap_or_default();
                    self.expect(TokenKind::Eq, "`=` after the applies list");
                    let definition = self
                        .expect_string("the attribute definition string")
                        .unwrap_or_default();
                    let taxonomy = &mut card.tooling.taxonomy;
                    if taxonomy.attribute(&name_token.text).is_some() {
                        self.error(
                            name_token.span,
                            format!("duplicate attribute `{}` in taxonomy", name_token.text),
                        );
                    } else {
                        self.register(
                            format!("attribute:{}", name_token.text),
                            name_token.span.clone(),
                        );
                        taxonomy.attributes.push(AttributeDef {
                            name: name_token.text,
                            applies_to,
                            definition,
                        });
                    }
                }
                _ => {
                    let found = self.peek().describe();
                    self.error_here(format!("unknown entry in `taxonomy`: {found}"));
                    self.advance();
                    self.recover_in_block(&["class", "attribute"]);
                }
            }
        }
    }

    fn handoff(&mut self, card: &mut NegotiationCard) {
        let mut format = None;
        let mut batch_size = None;
        let mut cadence = None;
        let keys = ["format", "batch_size", "cadence"];
        let span = self.peek().span.clone();
        loop {
            match self.kind() {
                TokenKind::RBrace => {
                    self.advance();
                    break;
                }
                TokenKind::Eof => {
                    self.error_here("unexpected end of file in `handoff`");
                    break;
                }
                TokenKind::Ident if keys.contains(&self.peek().text.as_str()) => {
                    let key = self.advance().text;
                    match key.as_str() {
                        "format" => format = self.eq_string("format"),
                        "cadence" => cadence = self.eq_string("cadence"),
                        _ => {
                            if self.expect(TokenKind::Eq, "`=` after `batch_size`").is_some() {
                                let token = self.advance();
                                match (token.kind, token.text.parse::<u64>()) {
                                    (TokenKind::Number, Ok(n)) if n > 0 => batch_size = Some(n),
                                    _ => self.error(
                                        token.span,
                                        "batch_size must be a positive integer".to_string(),
                                    ),
                                }
                            }
                        }
                    }
                }
                _ => {
                    let found = self.peek().describe();
                    self.error_here(format!("unknown entry in `handoff`: {found}"));
                    self.advance();
                    self.recover_in_block(&keys);
                }
            }
        }
        for (missing, field) in [
            (format.is_none(), "format"),
            (batch_size.is_none(), "batch_size"),
            (cadence.is_none(), "cadence"),
        ] {
            if missing {
                self.missing(span.clone(), format!("handoff is missing `{field}`"));
            }
        }
        if let (Some(format), Some(batch_size), Some(cadence)) = (format, batch_size, cadence) {
            card.tooling.handoff = Some(dars_core::Handoff {
                format,
                batch_size,
                cadence,
            });
        }
    }

    fn qa(&mut self, card: &mut NegotiationCard) {
        loop {
            match self.kind() {
                TokenKind::RBrace => {
                    self.advance();
                    return;
                }
                TokenKind::Eof => {
                    self.error_here("unexpected end of file in section `qa`");
                    return;
                }
                TokenKind::Keyword(Keyword::Threshold) => {
                    if let Some(threshold) = self.threshold() {
                        card.qa.thresholds.push(threshold);
                    }
                }
                TokenKind::Ident if self.peek().text == "review_cadence" => {
                    self.advance();
                    card.qa.review_cadence = self.eq_string("review_cadence");
                }
                TokenKind::Ident if self.peek().text == "feedback_channels" => {
                    self.advance();
                    if let Some(values) = self.eq_string_list("feedback_channels") {
                        card.qa.feedback_channels.extend(values);
                    }
                }
                _ => {
                    let found = self.peek().describe();
                    self.error_here(format!("unknown entry in section `qa`: {found}"));
                    self.advance();
                    self.recover_in_block(&["threshold", "review_cadence", "feedback_channels"]);
                }
            }
        }
    }

    fn threshold(&mut self) -> Option<Threshold> {
        self.advance(); // threshold keyword
        let id_token = self.expect(TokenKind::Ident, "a threshold id")?;
        let id = id_token.text;
        self.register(format!("threshold:{id}"), id_token.span.clone());
        self.expect(TokenKind::LBrace, "`{` opening the threshold body")?;

        let mut metric = None;
        let mut classes = None;
        let mut min_value = None;
        let mut match_iou = None;
        let mut scope = None;
        let keys = ["metric", "classes", "min", "match_iou", "scope"];
        loop {
            match self.kind() {
                TokenKind::RBrace => {
                    self.advance();
                    break;
                }
                TokenKind::Eof => {
                    self.error_here(format!("unexpected end of file in threshold `{id}`"));
                    break;
                }
                TokenKind::Ident if keys.contains(&self.peek().text.as_str()) => {
                    let key = self.advance().text;
                    if self.expect(TokenKind::Eq, &format!("`=` after `{key}`")).is_none() {
                        continue;
                    }
                    match key.as_str() {
                        "metric" => {
                            let token = self.advance();
                            metric = MetricKind::from_name(&token.text);
                            if metric.is_none() {
                                self.error(
                                    token.span,
                                    format!(
                                        "expected `recall` or `precision` as metric, found `{}`",
                                        token.text
                                    ),
                                );
                            }
                        }
                        "classes" => classes = self.ident_list(),
                        "min" => min_value = self.percent_value("threshold minimum"),
                        "match_iou" => {
                            let token = self.advance();
                            match (token.kind, token.text.parse::<f64>()) {
                                (TokenKind::Number, Ok(v)) if v > 0.0 && v <= 1.0 => {
                                    match_iou = Some(v)
                                }
                                _ => self.error(
                                    token.span,
                                    "match_iou must be a number in (0, 1]".to_string(),
                                ),
                            }
                        }
                        _ => scope = self.predicate(),
                    }
                }
                _ => {
                    let found = self.peek().describe();
                    self.error_here(format!("unknown entry in threshold `{id}`: {found}"));
                    self.advance();
                    self.recover_in_block(&keys);
                }
            }
        }

        let span = self.source_map[&format!("threshold:{id}")].clone();
        for (missing, field) in [
            (metric.is_none(), "metric"),
            (classes.is_none(), "classes"),
            (min_value.is_none(), "min"),
        ] {
            if missing {
                self.missing(span.clone(), format!("threshold `{id}` is missing `{field}`"));
            }
        }
        Some(Threshold {
            id,
            metric: metric?,
            classes: classes?,
            min_value: min_value?,
            match_iou: match_iou.unwrap_or(dars_core::card::DEFAULT_MATCH_IOU),
            scope,
        })
    }

    fn governance(&mut self, card: &mut NegotiationCard) {
        let keys = ["owner", "versioning_policy", "distribution"];
        let mut gov = std::mem::take(&mut card.governance);
        self.kv_body("governance", &keys, |p, key| {
            let span = p.peek().span.clone();
            let value = p.eq_string(key);
            let slot = match key {
                "owner" => &mut gov.owner,
                "versioning_policy" => &mut gov.versioning_policy,
                _ => &mut gov.distribution,
            };
            p.set_once(slot, key, "governance", span, value);
        });
        card.governance = gov;
    }

    // ------------------------------------------------------------------
    // requirements
    // ------------------------------------------------------------------

    fn requirement(&mut self, index: usize) -> Option<AnnotationRequirement> {
        let kw = self.advance();
        let Some(id_token) = self.expect(TokenKind::Ident, "a requirement id") else {
            self.recover_top_level();
            return None;
        };
        let id = id_token.text;
        if self.expect(TokenKind::Keyword(Keyword::Type), "`type` after the requirement id").is_none()
            && !matches!(self.kind(), TokenKind::Ident)
        {
            self.recover_top_level();
            return None;
        }
        let scenario_type = {
            let token = self.advance();
            match ScenarioType::from_name(&token.text) {
                Some(t) => t,
                None => {
                    self.error(
                        token.span,
                        format!(
                            "expected scenario type `standard`, `edge` or `exception`, found `{}`",
                            token.text
                        ),
                    );
                    ScenarioType::Standard
                }
            }
        };
        let header_span = kw.span.merge(&id_token.span);
        self.register(format!("req#{index}"), header_span.clone());
        self.register(format!("req:{id}"), header_span.clone());

        if self.expect(TokenKind::LBrace, "`{` opening the requirement body").is_none() {
            self.recover_top_level();
            return None;
        }

        let mut req = AnnotationRequirement {
            req_id: id.clone(),
            scenario_type,
            trace: None,
            stimulus: None,
            context: None,
            response: None,
            rationale: None,
            acceptance: None,
            visual_example: None,
        };

        loop {
            match self.kind() {
                TokenKind::RBrace => {
                    self.advance();
                    break;
                }
                TokenKind::Eof => {
                    self.error_here(format!("unexpected end of file in requirement `{id}`"));
                    break;
                }
                TokenKind::Keyword(Keyword::Trace) => {
                    self.advance();
                    if self.expect(TokenKind::Eq, "`=` after `trace`").is_some() {
                        req.trace = self.trace_ref(index);
                    }
                }
                TokenKind::Ident if REQ_FIELDS.contains(&self.peek().text.as_str()) => {
                    let field = self.peek().text.clone();
                    match field.as_str() {
                        "stimulus" => req.stimulus = self.stimulus_block(index),
                        "context" => req.context = self.context_block(),
                        "response" => req.response = self.response_block(index),
                        "rationale" => {
                            self.advance();
                            req.rationale = self.eq_string("rationale");
                        }
                        "acceptance" => req.acceptance = self.acceptance_block(&id),
                        _ => {
                            self.advance();
                            req.visual_example = self.eq_string("visual");
                        }
                    }
                }
                _ => {
                    let found = self.peek().describe();
                    self.error_here(format!("unknown entry in requirement `{id}`: {found}"));
                    self.advance();
                    self.recover_in_block(&["trace", "stimulus", "context", "response", "rationale", "acceptance", "visual"]);
                }
            }
        }

        for (missing, field) in [
            (req.trace.is_none(), "trace"),
            (req.stimulus.is_none(), "stimulus"),
            (req.response.is_none(), "response"),
            (req.acceptance.is_none(), "acceptance"),
        ] {
            if missing {
                self.missing(
                    header_span.clone(),
                    format!("requirement `{id}` is missing mandatory `{field}`"),
                );
            }
        }
        Some(req)
    }

    fn trace_ref(&mut self, index: usize) -> Option<TraceRef> {
        let card_id_token = self.expect(TokenKind::Str, "the card id string in a trace reference")?;
        if self.kind() != TokenKind::Hash {
            let found = self.peek().describe();
            self.error_here(format!(
                "expected `#` directly after the card id in a trace reference, found {found} \
                 (note: `#` preceded by whitespace starts a comment)"
            ));
            return None;
        }
        self.advance();
        let section = self.expect(TokenKind::Ident, "a card section name after `#`")?;
        let mut subpath = Vec::new();
        let mut end_span = section.span.clone();
        while self.kind() == TokenKind::Dot {
            self.advance();
            match self.kind() {
                TokenKind::Ident | TokenKind::Keyword(_) => {
                    let part = self.advance();
                    end_span = part.span.clone();
                    subpath.push(part.text);
                }
                _ => {
                    let found = self.peek().describe();
                    self.error_here(format!("expected a name after `.` in a trace reference, found {found}"));
                    break;
                }
            }
        }
        let span = card_id_token.span.merge(&end_span);
        self.register(format!("req#{index}:trace"), span);
        Some(TraceRef::new(card_id_token.text, section.text, subpath))
    }

    fn stimulus_block(&mut self, index: usize) -> Option<Stimulus> {
        self.advance(); // stimulus
        self.expect(TokenKind::LBrace, "`{` opening `stimulus`")?;
        let mut text = None;
        let mut when = None;
        loop {
            match self.kind() {
                TokenKind::RBrace => {
                    self.advance();
                    break;
                }
                TokenKind::Eof => {
                    self.error_here("unexpected end of file in `stimulus`");
                    break;
                }
                TokenKind::Ident if self.peek().text == "text" => {
                    self.advance();
                    text = self.eq_string("text");
                }
                TokenKind::Keyword(Keyword::When) => {
                    let span = self.advance().span;
                    if self.expect(TokenKind::Eq, "`=` after `when`").is_some() {
                        when = self.predicate();
                        self.register(format!("req#{index}:when"), span);
                    }
                }
                _ => {
                    let found = self.peek().describe();
                    self.error_here(format!("unknown entry in `stimulus`: {found}"));
                    self.advance();
                    self.recover_in_block(&["text", "when"]);
                }
            }
        }
        if text.is_none() {
            self.error_here("stimulus is missing `text`");
        }
        Some(Stimulus {
            text: text?,
            when,
        })
    }

    fn context_block(&mut self) -> Option<ReqContext> {
        self.advance(); // context
        self.expect(TokenKind::LBrace, "`{` opening `context`")?;
        let mut text = None;
        let mut given = None;
        loop {
            match self.kind() {
                TokenKind::RBrace => {
                    self.advance();
                    break;
                }
                TokenKind::Eof => {
                    self.error_here("unexpected end of file in `context`");
                    break;
                }
                TokenKind::Ident if self.peek().text == "text" => {
                    self.advance();
                    text = self.eq_string("text");
                }
                TokenKind::Keyword(Keyword::Given) => {
                    self.advance();
                    if self.expect(TokenKind::Eq, "`=` after `given`").is_some() {
                        given = self.predicate();
                    }
                }
                _ => {
                    let found = self.peek().describe();
                    self.error_here(format!("unknown entry in `context`: {found}"));
                    self.advance();
                    self.recover_in_block(&["text", "given"]);
                }
            }
        }
        Some(ReqContext { text, given })
    }

    fn response_block(&mut self, index: usize) -> Option<Response> {
        self.advance(); // response
        self.expect(TokenKind::LBrace, "`{` opening `response`")?;
        let mut action = None;
        let mut constraint = None;
        let mut effect = None;
        loop {
            match self.kind() {
                TokenKind::RBrace => {
                    self.advance();
                    break;
                }
                TokenKind::Eof => {
                    self.error_here("unexpected end of file in `response`");
                    break;
                }
                TokenKind::Ident if self.peek().text == "action" => {
                    let span = self.advance().span;
                    action = self.eq_string("action");
                    self.register(format!("req#{index}:action"), span);
                }
                TokenKind::Ident if self.peek().text == "constraint" => {
                    self.advance();
                    constraint = self.eq_string("constraint");
                }
                TokenKind::Ident if self.peek().text == "effect" => {
                    let span = self.advance().span;
                    if self.expect(TokenKind::Eq, "`=` after `effect`").is_some() {
                        effect = self.effect();
                        self.register(format!("req#{index}:effect"), span);
                    }
                }
                _ => {
                    let found = self.peek().describe();
                    self.error_here(format!("unknown entry in `response`: {found}"));
                    self.advance();
                    self.recover_in_block(&["action", "constraint", "effect"]);
                }
            }
        }
        if action.is_none() {
            self.error_here("response is missing `action`");
        }
        // empty constraint strings are treated as absent
        let constraint = constraint.filter(|c| !c.trim().is_empty());
        Some(Response {
            action: action?,
            constraint,
            effect,
        })
    }

    fn acceptance_block(&mut self, req_id: &str) -> Option<Acceptance> {
        self.advance(); // acceptance
        self.expect(TokenKind::LBrace, "`{` opening `acceptance`")?;
        let mut text = None;
        let mut metric_ref = None;
        loop {
            match self.kind() {
                TokenKind::RBrace => {
                    self.advance();
                    break;
                }
                TokenKind::Eof => {
                    self.error_here("unexpected end of file in `acceptance`");
                    break;
                }
                TokenKind::Ident if self.peek().text == "text" => {
                    self.advance();
                    text = self.eq_string("text");
                }
                TokenKind::Ident if self.peek().text == "metric" => {
                    self.advance();
                    if self.expect(TokenKind::Eq, "`=` after `metric`").is_some() {
                        metric_ref = self
                            .expect(TokenKind::Ident, "a threshold id after `metric`")
                            .map(|t| t.text);
                    }
                }
                _ => {
                    let found = self.peek().describe();
                    self.error_here(format!(
                        "unknown entry in `acceptance` of requirement `{req_id}`: {found}"
                    ));
                    self.advance();
                    self.recover_in_block(&["text", "metric"]);
                }
            }
        }
        if text.is_none() {
            self.error_here(format!("acceptance of requirement `{req_id}` is missing `text`"));
        }
        Some(Acceptance {
            text: text?,
            metric_ref,
        })
    }

    fn effect(&mut self) -> Option<Effect> {
        let token = self.advance();
        if token.kind != TokenKind::Ident {
            let found = token.describe();
            self.error(token.span, format!("expected an effect name, found {found}"));
            return None;
        }
        match token.text.as_str() {
            "annotate_box" => Some(Effect::AnnotateBox),
            "exclude_frame" => Some(Effect::ExcludeFrame),
            "anonymize" => Some(Effect::Anonymize),
            "set_attribute" => {
                self.expect(TokenKind::LParen, "`(` after `set_attribute`")?;
                let name = self.expect(TokenKind::Ident, "an attribute name")?.text;
                self.expect(TokenKind::Comma, "`,` between attribute name and value")?;
                let value = self.literal()?;
                self.expect(TokenKind::RParen, "`)` closing `set_attribute`")?;
                Some(Effect::SetAttribute { name, value })
            }
            "flag_frame" => {
                self.expect(TokenKind::LParen, "`(` after `flag_frame`")?;
                let reason = self.expect_string("a reason string")?;
                self.expect(TokenKind::RParen, "`)` closing `flag_frame`")?;
                Some(Effect::FlagFrame { reason })
            }
            other => {
                self.error(
                    token.span,
                    format!(
                        "unknown effect `{other}`; effects are annotate_box, \
                         set_attribute(name, value), exclude_frame, flag_frame(reason), anonymize"
                    ),
                );
                None
            }
        }
    }

    fn literal(&mut self) -> Option<Literal> {
        match self.operand()? {
            Operand::Literal(lit) => Some(lit),
            Operand::Field(path) => {
                self.error_here(format!("expected a literal value, found field path `{path}`"));
                None
            }
        }
    }

    // ------------------------------------------------------------------
    // predicates
    // ------------------------------------------------------------------

    fn predicate(&mut self) -> Option<Predicate> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Option<Predicate> {
        let first = self.and_expr()?;
        let mut parts = vec![first];
        while self.kind() == TokenKind::Keyword(Keyword::Or) {
            self.advance();
            parts.push(self.and_expr()?);
        }
        Some(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Predicate::Or(parts)
        })
    }

    fn and_expr(&mut self) -> Option<Predicate> {
        let first = self.unary_expr()?;
        let mut parts = vec![first];
        while self.kind() == TokenKind::Keyword(Keyword::And) {
            self.advance();
            parts.push(self.unary_expr()?);
        }
        Some(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Predicate::And(parts)
        })
    }

    fn unary_expr(&mut self) -> Option<Predicate> {
        match self.kind() {
            TokenKind::Keyword(Keyword::Not) => {
                self.advance();
                Some(Predicate::Not(Box::new(self.unary_expr()?)))
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.or_expr()?;
                self.expect(TokenKind::RParen, "`)` closing the group")?;
                Some(inner)
            }
            TokenKind::Keyword(Keyword::Has) => {
                self.advance();
                self.expect(TokenKind::LParen, "`(` after `has`")?;
                let path = self.field_path()?;
                self.expect(TokenKind::RParen, "`)` closing `has`")?;
                Some(Predicate::Has(path))
            }
            _ => {
                let lhs = self.operand()?;
                let op = match self.kind() {
                    TokenKind::EqEq => CmpOp::Eq,
                    TokenKind::Ne => CmpOp::Ne,
                    TokenKind::Lt => CmpOp::Lt,
                    TokenKind::Le => CmpOp::Le,
                    TokenKind::Gt => CmpOp::Gt,
                    TokenKind::Ge => CmpOp::Ge,
                    _ => {
                        let found = self.peek().describe();
                        self.error_here(format!(
                            "expected a comparison operator (==, !=, <, <=, >, >=), found {found}"
                        ));
                        return None;
                    }
                };
                self.advance();
                let rhs = self.operand()?;
                Some(Predicate::Cmp { op, lhs, rhs })
            }
        }
    }

    fn operand(&mut self) -> Option<Operand> {
        match self.kind() {
            TokenKind::Str => Some(Operand::Literal(Literal::Str(self.advance().text))),
            TokenKind::Number => {
                let token = self.advance();
                match token.text.parse::<f64>() {
                    Ok(n) => Some(Operand::Literal(Literal::Num(n))),
                    Err(_) => {
                        self.error(token.span, format!("malformed number `{}`", token.text));
                        None
                    }
                }
            }
            TokenKind::Percent => {
                let token = self.advance();
                match fraction_from_decimal(&token.text) {
                    Some(f) => Some(Operand::Literal(Literal::Percent(
                        f / Fraction::from_integer(100),
                    ))),
                    None => {
                        self.error(token.span, format!("malformed percent `{}%`", token.text));
                        None
                    }
                }
            }
            TokenKind::Keyword(Keyword::True) => {
                self.advance();
                Some(Operand::Literal(Literal::Bool(true)))
            }
            TokenKind::Keyword(Keyword::False) => {
                self.advance();
                Some(Operand::Literal(Literal::Bool(false)))
            }
            TokenKind::Ident => self.field_path().map(Operand::Field),
            _ => {
                let found = self.peek().describe();
                self.error_here(format!("expected a field path or literal, found {found}"));
                None
            }
        }
    }

    fn field_path(&mut self) -> Option<FieldPath> {
        let head = self.expect(TokenKind::Ident, "a field path")?;
        let sub_name = |p: &mut Self, head: &str| -> Option<String> {
            if p.kind() != TokenKind::Dot {
                p.error_here(format!("field `{head}` requires a sub-name, e.g. `{head}.<name>`"));
                return None;
            }
            p.advance();
            match p.kind() {
                TokenKind::Ident | TokenKind::Keyword(_) => Some(p.advance().text),
                _ => {
                    let found = p.peek().describe();
                    p.error_here(format!("expected a name after `{head}.`, found {found}"));
                    None
                }
            }
        };
        match head.text.as_str() {
            "class" => Some(FieldPath::Class),
            "distance_m" => Some(FieldPath::DistanceM),
            "occlusion" => Some(FieldPath::Occlusion),
            "attr" => sub_name(self, "attr").map(FieldPath::Attr),
            "meta" => sub_name(self, "meta").map(FieldPath::Meta),
            "frame" => sub_name(self, "frame").map(FieldPath::Frame),
            "bbox" => {
                let name = sub_name(self, "bbox")?;
                match BboxField::from_name(&name) {
                    Some(field) => Some(FieldPath::Bbox(field)),
                    None => {
                        self.error(
                            head.span,
                            format!("unknown bbox field `{name}`; expected x, y, w, h or area"),
                        );
                        None
                    }
                }
            }
            other => {
                self.error(
                    head.span,
                    format!(
                        "unknown field `{other}`; fields are class, attr.<name>, meta.<name>, \
                         bbox.{{x,y,w,h,area}}, frame.<name>, distance_m, occlusion"
                    ),
                );
                None
            }
        }
    }
}
