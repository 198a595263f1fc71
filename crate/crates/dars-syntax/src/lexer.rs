//! Lexer with error recovery: malformed input becomes diagnostics, never a
//! failure.
//!
//! `#` is both the comment marker and the trace-reference separator. The two
//! are distinguished by what precedes the `#`: at the start of a line or
//! after whitespace it opens a comment that runs to the end of the line;
//! directly after a token (as in `"AEB-URBAN"#tooling`) it is punctuation.

use dars_core::{Diagnostic, SourceSpan};

use crate::token::{Keyword, Token, TokenKind};

struct Lexer<'a> {
    file: &'a str,
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    tokens: Vec<Token>,
    diagnostics: Vec<Diagnostic>,
}

/// Splits source text into tokens. Comments and whitespace are skipped;
/// unknown characters produce `E001` and are skipped as well.
pub fn tokenize(source: &str, file: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut lexer = Lexer {
        file,
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        tokens: Vec::new(),
        diagnostics: Vec::new(),
    };
    lexer.run();
    (lexer.tokens, lexer.diagnostics)
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span_from(&self, line: u32, col: u32) -> SourceSpan {
        // end column points at the last consumed character
        let col_end = if self.col > 1 { self.col - 1 } else { self.col };
        let line_end = if self.col == 1 && self.line > line {
            self.line - 1
        } else {
            self.line
        };
        SourceSpan::new(self.file, line, col, line_end, col_end.max(col))
    }

    fn push(&mut self, kind: TokenKind, text: String, line: u32, col: u32) {
        let span = self.span_from(line, col);
        self.tokens.push(Token { kind, text, span });
    }

    fn error(&mut self, span: SourceSpan, message: String) {
        self.diagnostics.push(Diagnostic::error("E001", span, message));
    }

    fn run(&mut self) {
        // whether the previous character was whitespace or start of input;
        // decides the comment-vs-punctuation reading of `#`
        let mut after_gap = true;
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
                after_gap = true;
                continue;
            }
            if c == '#' && after_gap {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
                continue;
            }
            self.next_token(c);
            after_gap = false;
        }
        let eof_span = SourceSpan::point(self.file, self.line, self.col);
        self.tokens.push(Token {
            kind: TokenKind::Eof,
            text: String::new(),
            span: eof_span,
        });
    }

    fn next_token(&mut self, first: char) {
        let (line, col) = (self.line, self.col);
        match first {
            '"' => self.string(line, col),
            c if c.is_ascii_digit() => self.number(line, col),
            c if c.is_ascii_alphabetic() || c == '_' => self.ident(line, col),
            '{' => self.punct(TokenKind::LBrace, line, col),
            '}' => self.punct(TokenKind::RBrace, line, col),
            '[' => self.punct(TokenKind::LBracket, line, col),
            ']' => self.punct(TokenKind::RBracket, line, col),
            '(' => self.punct(TokenKind::LParen, line, col),
            ')' => self.punct(TokenKind::RParen, line, col),
            ',' => self.punct(TokenKind::Comma, line, col),
            '.' => self.punct(TokenKind::Dot, line, col),
            '#' => self.punct(TokenKind::Hash, line, col),
            '=' => {
                self.bump();
                if self.peek() == Some('=') {
                    self.bump();
                    self.push(TokenKind::EqEq, "==".into(), line, col);
                } else {
                    self.push(TokenKind::Eq, "=".into(), line, col);
                }
            }
            '!' => {
                self.bump();
                if self.peek() == Some('=') {
                    self.bump();
                    self.push(TokenKind::Ne, "!=".into(), line, col);
                } else {
                    let span = self.span_from(line, col);
                    self.error(span, "unknown character `!` (did you mean `!=`?)".into());
                }
            }
            '<' => {
                self.bump();
                if self.peek() == Some('=') {
                    self.bump();
                    self.push(TokenKind::Le, "<=".into(), line, col);
                } else {
                    self.push(TokenKind::Lt, "<".into(), line, col);
                }
            }
            '>' => {
                self.bump();
                if self.peek() == Some('=') {
                    self.bump();
                    self.push(TokenKind::Ge, ">=".into(), line, col);
                } else {
                    self.push(TokenKind::Gt, ">".into(), line, col);
                }
            }
            other => {
                self.bump();
                let span = self.span_from(line, col);
                self.error(span, format!("unknown character `{other}`"));
            }
        }
    }

    fn punct(&mut self, kind: TokenKind, line: u32, col: u32) {
        let c = self.bump().unwrap();
        self.push(kind, c.to_string(), line, col);
    }

    fn string(&mut self, line: u32, col: u32) {
        self.bump(); // opening quote
        let mut value = String::new();
        loop {
            match self.peek() {
                None | Some('\n') => {
                    let span = self.span_from(line, col);
                    self.error(span, "unterminated string".into());
                    break;
                }
                Some('"') => {
                    self.bump();
                    break;
                }
                Some('\\') => {
                    self.bump();
                    match self.peek() {
                        Some('"') => {
                            self.bump();
                            value.push('"');
                        }
                        Some('\\') => {
                            self.bump();
                            value.push('\\');
                        }
                        other => {
                            let span = SourceSpan::point(self.file, self.line, self.col);
                            self.error(
                                span,
                                match other {
                                    Some(c) => format!("unknown escape `\\{c}`"),
                                    None => "unknown escape at end of file".into(),
                                },
                            );
                            if other.is_some() {
                                self.bump();
                            }
                        }
                    }
                }
                Some(c) => {
                    self.bump();
                    value.push(c);
                }
            }
        }
        self.push(TokenKind::Str, value, line, col);
    }

    fn number(&mut self, line: u32, col: u32) {
        let mut lexeme = String::new();
        let mut dots = 0usize;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                lexeme.push(c);
                self.bump();
            } else if c == '.' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
                dots += 1;
                lexeme.push('.');
                self.bump();
            } else {
                break;
            }
        }
        if self.peek() == Some('%') {
            self.bump();
            if dots > 1 {
                let span = self.span_from(line, col);
                self.error(span, format!("malformed percent literal `{lexeme}%`"));
            }
            self.push(TokenKind::Percent, lexeme, line, col);
            return;
        }
        let kind = match dots {
            0 | 1 => TokenKind::Number,
            // two or more dots reads as a version; version parsing reports
            // arity violations with the offending component
            _ => TokenKind::SemVer,
        };
        self.push(kind, lexeme, line, col);
    }

    fn ident(&mut self, line: u32, col: u32) {
        let mut lexeme = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                lexeme.push(c);
                self.bump();
            } else {
                break;
            }
        }
        let kind = match Keyword::from_ident(&lexeme) {
            Some(kw) => TokenKind::Keyword(kw),
            None => TokenKind::Ident,
        };
        self.push(kind, lexeme, line, col);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(source: &str) -> (Vec<TokenKind>, Vec<Diagnostic>) {
        let (tokens, diags) = tokenize(source, "t.dars");
        (tokens.into_iter().map(|t| t.kind).collect(), diags)
    }

    #[test]
    fn lexes_percent_assignment() {
        let (tokens, diags) = tokenize("min = 10%", "t.dars");
        assert!(diags.is_empty());
        assert_eq!(tokens[0].kind, TokenKind::Ident);
        assert_eq!(tokens[0].text, "min");
        assert_eq!(tokens[1].kind, TokenKind::Eq);
        assert_eq!(tokens[2].kind, TokenKind::Percent);
        assert_eq!(tokens[2].text, "10");
        assert_eq!(tokens[3].kind, TokenKind::Eof);
    }

    #[test]
    fn lexes_escaped_string() {
        let (tokens, diags) = tokenize(r#""e-scooter" "a \"b\" \\c""#, "t.dars");
        assert!(diags.is_empty());
        assert_eq!(tokens[0].kind, TokenKind::Str);
        assert_eq!(tokens[0].text, "e-scooter");
        assert_eq!(tokens[1].text, "a \"b\" \\c");
    }

    #[test]
    fn unknown_character_is_reported_and_skipped() {
        let (tokens, diags) = tokenize("class == \"rider\" @", "t.dars");
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, "E001");
        assert_eq!(diags[0].span.col_start, 18);
        // the tokens before the @ survive
        let kinds: Vec<_> = tokens.iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![TokenKind::Ident, TokenKind::EqEq, TokenKind::Str, TokenKind::Eof]
        );
    }

    #[test]
    fn hash_is_comment_after_whitespace_and_punct_after_token() {
        let (tokens, diags) = tokenize("\"X\"#qa # trailing comment\nnext", "t.dars");
        assert!(diags.is_empty());
        let kinds: Vec<_> = tokens.iter().map(|t| (t.kind, t.text.clone())).collect();
        assert_eq!(kinds[0], (TokenKind::Str, "X".into()));
        assert_eq!(kinds[1], (TokenKind::Hash, "#".into()));
        assert_eq!(kinds[2], (TokenKind::Ident, "qa".into()));
        assert_eq!(kinds[3], (TokenKind::Ident, "next".into()));
    }

    #[test]
    fn comment_at_line_start() {
        let (kinds, diags) = kinds("# whole line\nmin");
        assert!(diags.is_empty());
        assert_eq!(kinds, vec![TokenKind::Ident, TokenKind::Eof]);
    }

    #[test]
    fn version_like_numbers() {
        let (tokens, _) = tokenize("1.0 1.0.0 1.0.0.0 42", "t.dars");
        assert_eq!(tokens[0].kind, TokenKind::Number);
        assert_eq!(tokens[1].kind, TokenKind::SemVer);
        assert_eq!(tokens[2].kind, TokenKind::SemVer);
        assert_eq!(tokens[2].text, "1.0.0.0");
        assert_eq!(tokens[3].kind, TokenKind::Number);
    }

    #[test]
    fn spans_are_one_based_and_monotonic() {
        let (tokens, _) = tokenize("a bb\n  ccc", "t.dars");
        assert_eq!(tokens[0].span, SourceSpan::new("t.dars", 1, 1, 1, 1));
        assert_eq!(tokens[1].span, SourceSpan::new("t.dars", 1, 3, 1, 4));
        assert_eq!(tokens[2].span, SourceSpan::new("t.dars", 2, 3, 2, 5));
        for pair in tokens.windows(2) {
            assert!(
                (pair[0].span.line_end, pair[0].span.col_end)
                    <= (pair[1].span.line_start, pair[1].span.col_start)
            );
        }
    }

    #[test]
    fn unterminated_string_recovers() {
        let (tokens, diags) = tokenize("\"abc\nmin", "t.dars");
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("unterminated"));
        assert_eq!(tokens[0].kind, TokenKind::Str);
        assert_eq!(tokens[1].text, "min");
    }
}
