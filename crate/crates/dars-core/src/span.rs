//! Source positions for diagnostics and the workspace source map.

use std::fmt;

/// A contiguous region of an input file, with 1-based line/column positions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub file: String,
    pub line_start: u32,
    pub col_start: u32,
    pub line_end: u32,
    pub col_end: u32,
}

impl SourceSpan {
    pub fn new(
        file: impl Into<String>,
        line_start: u32,
        col_start: u32,
        line_end: u32,
        col_end: u32,
    ) -> Self {
        Self {
            file: file.into(),
            line_start,
            col_start,
            line_end,
            col_end,
        }
    }

    /// A zero-width span at a single position.
    pub fn point(file: impl Into<String>, line: u32, col: u32) -> Self {
        Self::new(file, line, col, line, col)
    }

    /// Span for elements constructed in memory rather than parsed.
    pub fn synthetic() -> Self {
        Self::point("<memory>", 1, 1)
    }

    /// Smallest span covering both `self` and `other`. Files must match;
    /// otherwise `self` is returned unchanged.
    pub fn merge(&self, other: &SourceSpan) -> SourceSpan {
        if self.file != other.file {
            return self.clone();
        }
        let (line_start, col_start) =
            (self.line_start, self.col_start).min((other.line_start, other.col_start));
        let (line_end, col_end) =
            (self.line_end, self.col_end).max((other.line_end, other.col_end));
        SourceSpan {
            file: self.file.clone(),
            line_start,
            col_start,
            line_end,
            col_end,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line_start, self.col_start)
    }
}
