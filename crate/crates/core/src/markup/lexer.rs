use std::ops::Range;

use super::error::{MarkupError, MarkupErrorKind};
use super::pos::{SourcePos, Span};

/// Which lexical rules apply to `&` and friends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexMode {
    /// Formula bodies. `&` is only a column separator inside an environment.
    Math,
    /// Bodies of `tabular`, where `&` always separates columns.
    Table,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    /// `\name`, holding `name` without the backslash.
    Command(String),
    LBrace,
    RBrace,
    Caret,
    Underscore,
    Ampersand,
    /// `\\`
    RowBreak,
    Letter(char),
    Digits(String),
    OpChar(char),
    Whitespace,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

/// Splits a whole source into tokens.
pub fn tokenize(source: &str, mode: LexMode) -> Result<Vec<Token>, MarkupError> {
    tokenize_range(source, 0..source.len(), SourcePos::ORIGIN, mode)
}

/// Tokenizes `source[range]`, where `start` is the position of `range.start`.
///
/// Positions in the returned tokens and errors are relative to the full
/// `source`, so callers embedding a formula in a larger document get
/// document coordinates for free.
pub(crate) fn tokenize_range(
    source: &str,
    range: Range<usize>,
    start: SourcePos,
    mode: LexMode,
) -> Result<Vec<Token>, MarkupError> {
    debug_assert_eq!(start.offset, range.start);
    Lexer {
        text: &source[range.clone()],
        cursor: 0,
        pos: start,
        mode,
        env_depth: 0,
        tokens: Vec::new(),
    }
    .run()
}

struct Lexer<'s> {
    text: &'s str,
    cursor: usize,
    pos: SourcePos,
    mode: LexMode,
    env_depth: usize,
    tokens: Vec<Token>,
}

impl Lexer<'_> {
    fn run(mut self) -> Result<Vec<Token>, MarkupError> {
        while let Some(ch) = self.peek() {
            let start = self.cursor;
            let kind = match ch {
                '\\' => self.backslash()?,
                c if is_space(c) => {
                    self.eat_while(is_space);
                    TokenKind::Whitespace
                }
                '~' => {
                    self.bump();
                    TokenKind::Whitespace
                }
                '{' => self.single(TokenKind::LBrace),
                '}' => self.single(TokenKind::RBrace),
                '^' => self.single(TokenKind::Caret),
                '_' => self.single(TokenKind::Underscore),
                '&' if self.mode == LexMode::Table || self.env_depth > 0 => {
                    self.single(TokenKind::Ampersand)
                }
                c if c.is_ascii_digit() => self.digits(),
                c if c.is_alphabetic() => self.single(TokenKind::Letter(c)),
                c if c.is_control() || matches!(c, '$' | '%' | '#' | '&') => {
                    return Err(self.stray(c));
                }
                c => self.single(TokenKind::OpChar(c)),
            };
            self.push(start, kind);
        }
        Ok(self.tokens)
    }

    fn peek(&self) -> Option<char> {
        self.text[self.cursor..].chars().next()
    }

    fn peek_second(&self) -> Option<char> {
        let mut it = self.text[self.cursor..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let ch = self.peek()?;
        self.cursor += ch.len_utf8();
        Some(ch)
    }

    fn single(&mut self, kind: TokenKind) -> TokenKind {
        self.bump();
        kind
    }

    fn eat_while(&mut self, pred: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
    }

    fn push(&mut self, start: usize, kind: TokenKind) {
        let text = &self.text[start..self.cursor];
        let begin = self.pos;
        self.pos = self.pos.advance(text);
        self.tokens.push(Token {
            kind,
            span: Span::new(begin, self.pos),
        });
    }

    fn digits(&mut self) -> TokenKind {
        let start = self.cursor;
        self.eat_while(|c| c.is_ascii_digit());
        if self.peek() == Some('.') && self.peek_second().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            self.eat_while(|c| c.is_ascii_digit());
        }
        TokenKind::Digits(self.text[start..self.cursor].to_string())
    }

    fn backslash(&mut self) -> Result<TokenKind, MarkupError> {
        self.bump();
        let Some(next) = self.peek() else {
            return Err(MarkupError::new(
                MarkupErrorKind::StrayCharacter,
                self.pos,
                "a lone `\\` at the end of the formula",
            ));
        };
        let kind = match next {
            c if c.is_ascii_alphabetic() => {
                let start = self.cursor;
                self.eat_while(|c| c.is_ascii_alphabetic());
                let name = &self.text[start..self.cursor];
                match name {
                    "begin" => self.env_depth += 1,
                    "end" => self.env_depth = self.env_depth.saturating_sub(1),
                    _ => {}
                }
                return Ok(TokenKind::Command(name.to_string()));
            }
            '\\' => TokenKind::RowBreak,
            ',' | ';' | ':' | '!' | ' ' => TokenKind::Whitespace,
            '{' | '}' | '$' | '%' | '#' | '&' | '_' => TokenKind::OpChar(next),
            '|' => TokenKind::OpChar('\u{2016}'),
            other => {
                return Err(MarkupError::new(
                    MarkupErrorKind::StrayCharacter,
                    self.pos,
                    format!(
                        "`\\{}` is not a supported control sequence",
                        other.escape_debug()
                    ),
                ))
            }
        };
        self.bump();
        Ok(kind)
    }

    fn stray(&self, ch: char) -> MarkupError {
        let what = match ch {
            '&' => "`&` outside a table or matrix".to_string(),
            '$' => "`$` inside a formula (write `\\$` for a literal dollar)".to_string(),
            c if c.is_control() => format!("control character U+{:04X}", c as u32),
            c => format!("`{c}` is reserved; escape it as `\\{c}`"),
        };
        MarkupError::new(MarkupErrorKind::StrayCharacter, self.pos, what)
    }
}

fn is_space(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\n' | '\r')
}
