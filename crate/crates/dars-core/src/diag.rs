//! Diagnostics: the uniform output of parsing, validation and auditing.
//!
//! Every finding carries a stable code (`Exxx` for errors, `Wxxx` for
//! warnings), a source span and a human-readable message. The full code
//! catalogue is documented in the repository README.

use std::fmt;

use crate::span::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Warning => write!(f, "warning"),
            Severity::Error => write!(f, "error"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: &'static str,
    pub severity: Severity,
    pub span: SourceSpan,
    pub message: String,
    /// Secondary locations with notes (e.g. the first declaration for a
    /// duplicate-id finding).
    pub related: Vec<(SourceSpan, String)>,
}

impl Diagnostic {
    pub fn error(code: &'static str, span: SourceSpan, message: impl Into<String>) -> Self {
        debug_assert!(code.starts_with('E'), "error codes start with E: {code}");
        Self {
            code,
            severity: Severity::Error,
            span,
            message: message.into(),
            related: Vec::new(),
        }
    }

    pub fn warning(code: &'static str, span: SourceSpan, message: impl Into<String>) -> Self {
        debug_assert!(code.starts_with('W'), "warning codes start with W: {code}");
        Self {
            code,
            severity: Severity::Warning,
            span,
            message: message.into(),
            related: Vec::new(),
        }
    }

    pub fn with_related(mut self, span: SourceSpan, note: impl Into<String>) -> Self {
        self.related.push((span, note.into()));
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} [{}]: {}",
            self.span, self.severity, self.code, self.message
        )
    }
}

/// Sorts diagnostics into the canonical reporting order:
/// (file, line, column, code) lexicographic. The sort is stable, so
/// diagnostics that tie on all four keys keep their emission order.
pub fn sort_diagnostics(diagnostics: &mut [Diagnostic]) {
    diagnostics.sort_by(|a, b| {
        (&a.span.file, a.span.line_start, a.span.col_start, a.code).cmp(&(
            &b.span.file,
            b.span.line_start,
            b.span.col_start,
            b.code,
        ))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sort_orders_by_file_line_col_code() {
        let mut diags = vec![
            Diagnostic::warning("W102", SourceSpan::point("b", 1, 1), "later file"),
            Diagnostic::error("E101", SourceSpan::point("a", 2, 1), "line 2"),
            Diagnostic::error("E103", SourceSpan::point("a", 1, 5), "col 5 second code"),
            Diagnostic::error("E101", SourceSpan::point("a", 1, 5), "col 5 first code"),
        ];
        sort_diagnostics(&mut diags);
        let codes: Vec<_> = diags.iter().map(|d| (d.span.file.as_str(), d.code)).collect();
        assert_eq!(
            codes,
            vec![("a", "E101"), ("a", "E103"), ("a", "E101"), ("b", "W102")]
        );
    }
}
