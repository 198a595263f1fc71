//! Tokens of the `.dars` notation.

use dars_core::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Card,
    Requirement,
    Quota,
    Threshold,
    Type,
    Trace,
    When,
    Given,
    And,
    Or,
    Not,
    Has,
    True,
    False,
}

impl Keyword {
    pub fn from_ident(text: &str) -> Option<Keyword> {
        Some(match text {
            "card" => Keyword::Card,
            "requirement" => Keyword::Requirement,
            "quota" => Keyword::Quota,
            "threshold" => Keyword::Threshold,
            "type" => Keyword::Type,
            "trace" => Keyword::Trace,
            "when" => Keyword::When,
            "given" => Keyword::Given,
            "and" => Keyword::And,
            "or" => Keyword::Or,
            "not" => Keyword::Not,
            "has" => Keyword::Has,
            "true" => Keyword::True,
            "false" => Keyword::False,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Keyword(Keyword),
    /// String literal; `text` holds the unescaped value.
    Str,
    /// Integer or decimal number (at most one dot).
    Number,
    /// Number immediately followed by `%`; `text` holds the digits only.
    Percent,
    /// Dotted numeric version (exactly two dots, e.g. `1.0.0`); also any
    /// longer run of dotted digits, which version parsing then rejects.
    SemVer,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Eq,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Comma,
    Dot,
    Hash,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Unescaped value for `Str`, digits for `Percent`, raw lexeme otherwise.
    pub text: String,
    pub span: SourceSpan,
}

impl Token {
    pub fn describe(&self) -> String {
        match self.kind {
            TokenKind::Eof => "end of file".to_string(),
            TokenKind::Str => format!("string {:?}", self.text),
            _ => format!("`{}`", self.text),
        }
    }
}
