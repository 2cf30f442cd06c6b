//! Recursive-descent parser from math tokens to [`MathNode`] trees.
//!
//! ```text
//! seq      := scripted*
//! scripted := atom? ( '^' arg | '_' arg ){0,2}     at most one of each
//! atom     := Letter | Digits | OpChar | group | command
//! group    := '{' seq '}'
//! arg      := group | single token atom            `x^2`, `\frac12`
//! command  := '\frac' arg arg
//!           | '\sqrt' ( '[' seq ']' )? arg
//!           | '\left' delim seq '\right' delim
//!           | '\begin{' env '}' rows '\end{' env '}'
//!           | symbol
//! rows     := cells ( '\\' cells )*      cells := seq ( '&' seq )*
//! ```
//!
//! A script attached to a big operator is folded into the operator's limits.
//! Whitespace tokens are dropped before parsing.

use super::ast::{ColumnAlign, MathNode, NodeKind};
use super::error::{MarkupError, MarkupErrorKind};
use super::lexer::{tokenize, LexMode, Token, TokenKind};
use super::pos::{SourcePos, Span};
use super::symbols::{symbol_lookup, SymbolClass};

/// Maximum structural nesting accepted before parsing fails.
pub const MAX_NESTING: usize = 64;

/// Parses a math-mode token stream into a single node.
///
/// Multiple top-level atoms are wrapped in a `Row`; an empty stream yields an
/// empty `Row`. Errors carry positions but no snippet.
pub fn parse_math(tokens: &[Token]) -> Result<MathNode, MarkupError> {
    let start = tokens.first().map_or(SourcePos::ORIGIN, |t| t.span.start);
    parse_math_at(tokens, start)
}

/// Tokenizes and parses a standalone formula, attaching snippets to errors.
pub fn parse_formula(source: &str) -> Result<MathNode, MarkupError> {
    tokenize(source, LexMode::Math)
        .and_then(|tokens| parse_math(&tokens))
        .map_err(|e| e.with_snippet(source))
}

/// Like [`parse_math`], with `start` used as the position of an empty formula.
pub(crate) fn parse_math_at(tokens: &[Token], start: SourcePos) -> Result<MathNode, MarkupError> {
    let mut parser = Parser::new(tokens, start);
    let items = parser.parse_seq(false)?;
    parser.expect_exhausted()?;
    Ok(make_row(items, Span::empty(start)))
}

/// Parses the body of a `tabular` environment.
pub(crate) fn parse_table_body(
    tokens: &[Token],
    start: SourcePos,
    columns: usize,
) -> Result<Vec<Vec<MathNode>>, MarkupError> {
    let mut parser = Parser::new(tokens, start);
    let rows = parser.parse_rows(Some(columns))?;
    parser.expect_exhausted()?;
    Ok(rows)
}

struct Parser {
    tokens: Vec<Token>,
    cursor: usize,
    depth: usize,
    last_end: SourcePos,
}

impl Parser {
    fn new(tokens: &[Token], start: SourcePos) -> Parser {
        Parser {
            tokens: tokens
                .iter()
                .filter(|t| t.kind != TokenKind::Whitespace)
                .cloned()
                .collect(),
            cursor: 0,
            depth: 0,
            last_end: start,
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.cursor)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn bump(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.cursor).cloned()?;
        self.cursor += 1;
        self.last_end = tok.span.end;
        Some(tok)
    }

    /// Position used for errors about something missing at the current point.
    fn here(&self) -> SourcePos {
        self.peek().map_or(self.last_end, |t| t.span.start)
    }

    fn enter(&mut self, at: SourcePos) -> Result<(), MarkupError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(MarkupError::new(
                MarkupErrorKind::NestingTooDeep,
                at,
                format!("formula nests deeper than {MAX_NESTING} levels"),
            ));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn is_closer(kind: &TokenKind, in_bracket: bool) -> bool {
        match kind {
            TokenKind::RBrace | TokenKind::Ampersand | TokenKind::RowBreak => true,
            TokenKind::Command(name) => name == "right" || name == "end",
            TokenKind::OpChar(']') => in_bracket,
            _ => false,
        }
    }

    fn parse_seq(&mut self, in_bracket: bool) -> Result<Vec<MathNode>, MarkupError> {
        let mut items = Vec::new();
        while let Some(kind) = self.peek_kind() {
            if Self::is_closer(kind, in_bracket) {
                break;
            }
            items.push(self.parse_scripted()?);
        }
        Ok(items)
    }

    /// Fails on whatever closer stopped the top-level sequence.
    fn expect_exhausted(&self) -> Result<(), MarkupError> {
        let Some(tok) = self.peek() else {
            return Ok(());
        };
        let (kind, message) = match &tok.kind {
            TokenKind::RBrace => (MarkupErrorKind::UnbalancedBrace, "unmatched `}`"),
            TokenKind::Ampersand => (
                MarkupErrorKind::StrayCharacter,
                "`&` outside a table or matrix",
            ),
            TokenKind::RowBreak => (
                MarkupErrorKind::StrayCharacter,
                "`\\\\` outside a table or matrix",
            ),
            TokenKind::Command(name) if name == "right" => (
                MarkupErrorKind::StrayCharacter,
                "`\\right` without a matching `\\left`",
            ),
            TokenKind::Command(_) => (
                MarkupErrorKind::StrayCharacter,
                "`\\end` without a matching `\\begin`",
            ),
            _ => (MarkupErrorKind::StrayCharacter, "unexpected token"),
        };
        Err(MarkupError::new(kind, tok.span.start, message))
    }

    fn parse_scripted(&mut self) -> Result<MathNode, MarkupError> {
        let mut base = match self.peek_kind() {
            Some(TokenKind::Caret | TokenKind::Underscore) => {
                MathNode::new(NodeKind::Row(Vec::new()), Span::empty(self.here()))
            }
            _ => self.parse_atom()?,
        };
        let mut sub: Option<MathNode> = None;
        let mut sup: Option<MathNode> = None;
        loop {
            let is_sup = match self.peek_kind() {
                Some(TokenKind::Caret) => true,
                Some(TokenKind::Underscore) => false,
                _ => break,
            };
            let marker = self.bump().expect("peeked");
            let slot = if is_sup { &mut sup } else { &mut sub };
            if slot.is_some() {
                let which = if is_sup { "superscript" } else { "subscript" };
                return Err(MarkupError::new(
                    MarkupErrorKind::DoubleScript,
                    marker.span.start,
                    format!("double {which}; use braces to group"),
                ));
            }
            self.enter(marker.span.start)?;
            let arg = self.parse_arg(&marker, if is_sup { "`^`" } else { "`_`" })?;
            self.leave();
            let slot = if is_sup { &mut sup } else { &mut sub };
            *slot = Some(arg);
        }
        if sub.is_none() && sup.is_none() {
            return Ok(base);
        }
        let last = sup
            .iter()
            .chain(sub.iter())
            .map(|n| n.span.end)
            .max_by_key(|p| p.offset)
            .expect("one script present");
        let span = Span::new(base.span.start, last);
        if let NodeKind::BigOp { lower, upper, .. } = &mut base.kind {
            if lower.is_none() && upper.is_none() {
                *lower = sub.map(Box::new);
                *upper = sup.map(Box::new);
                base.span = span;
                return Ok(base);
            }
        }
        Ok(MathNode::new(
            NodeKind::Script {
                base: Box::new(base),
                sub: sub.map(Box::new),
                sup: sup.map(Box::new),
            },
            span,
        ))
    }

    fn parse_atom(&mut self) -> Result<MathNode, MarkupError> {
        let tok = self.bump().expect("caller checked for a token");
        let kind = match tok.kind {
            TokenKind::Letter(c) => NodeKind::Ident(c),
            TokenKind::Digits(d) => NodeKind::Num(d),
            TokenKind::OpChar(c) => NodeKind::Op(c),
            TokenKind::LBrace => return self.parse_group_body(&tok),
            TokenKind::Command(ref name) => return self.parse_command(name.clone(), &tok),
            _ => unreachable!("closers and scripts are handled by the caller"),
        };
        Ok(MathNode::new(kind, tok.span))
    }

    /// Parses after an opening `{` up to and including its `}`.
    fn parse_group_body(&mut self, open: &Token) -> Result<MathNode, MarkupError> {
        self.enter(open.span.start)?;
        let items = self.parse_seq(false)?;
        match self.peek_kind() {
            Some(TokenKind::RBrace) => {
                self.bump();
            }
            _ => {
                return Err(MarkupError::new(
                    MarkupErrorKind::UnbalancedBrace,
                    open.span.start,
                    "unmatched `{`",
                ))
            }
        }
        self.leave();
        let span = Span::new(open.span.start, self.last_end);
        Ok(make_row(items, span))
    }

    /// A required argument: a braced group or a single token.
    fn parse_arg(&mut self, owner: &Token, what: &str) -> Result<MathNode, MarkupError> {
        let missing = |at| {
            MarkupError::new(
                MarkupErrorKind::EmptyArgument,
                at,
                format!("{what} is missing an argument"),
            )
        };
        let Some(next) = self.peek().cloned() else {
            return Err(missing(owner.span.start));
        };
        match next.kind {
            TokenKind::LBrace => {
                self.bump();
                let node = self.parse_group_body(&next)?;
                if node.is_empty_row() {
                    return Err(missing(next.span.start));
                }
                Ok(node)
            }
            TokenKind::Digits(ref digits) if digits.len() > 1 => {
                // Only the first digit binds, as in `x^23` = x²3.
                let first_end = next.span.start.advance(&digits[..1]);
                let rest = &mut self.tokens[self.cursor];
                rest.kind = TokenKind::Digits(digits[1..].to_string());
                rest.span.start = first_end;
                self.last_end = first_end;
                Ok(MathNode::new(
                    NodeKind::Num(digits[..1].to_string()),
                    Span::new(next.span.start, first_end),
                ))
            }
            TokenKind::Letter(_) | TokenKind::Digits(_) | TokenKind::OpChar(_) => self.parse_atom(),
            TokenKind::Command(ref name) if name != "right" && name != "end" => self.parse_atom(),
            _ => Err(missing(next.span.start)),
        }
    }

    fn parse_command(&mut self, name: String, tok: &Token) -> Result<MathNode, MarkupError> {
        let start = tok.span.start;
        match name.as_str() {
            "frac" => {
                self.enter(start)?;
                let numerator = self.parse_arg(tok, "`\\frac` numerator")?;
                let denominator = self.parse_arg(tok, "`\\frac` denominator")?;
                self.leave();
                Ok(MathNode::new(
                    NodeKind::Frac {
                        numerator: Box::new(numerator),
                        denominator: Box::new(denominator),
                    },
                    Span::new(start, self.last_end),
                ))
            }
            "sqrt" => {
                self.enter(start)?;
                let degree = match self.peek_kind() {
                    Some(TokenKind::OpChar('[')) => Some(self.parse_root_degree()?),
                    _ => None,
                };
                let radicand = self.parse_arg(tok, "`\\sqrt`")?;
                self.leave();
                Ok(MathNode::new(
                    NodeKind::Root {
                        degree: degree.map(Box::new),
                        radicand: Box::new(radicand),
                    },
                    Span::new(start, self.last_end),
                ))
            }
            "left" => self.parse_left_right(tok),
            "begin" => self.parse_matrix_env(tok),
            _ => match symbol_lookup(&name) {
                Some(info) => {
                    let kind = match info.class {
                        SymbolClass::BigOp => NodeKind::BigOp {
                            name,
                            codepoint: info.codepoint,
                            lower: None,
                            upper: None,
                        },
                        class => NodeKind::Symbol {
                            name,
                            codepoint: info.codepoint,
                            operator: class == SymbolClass::Operator,
                        },
                    };
                    Ok(MathNode::new(kind, tok.span))
                }
                None => Err(MarkupError::new(
                    MarkupErrorKind::UnknownCommand,
                    start,
                    format!("unknown command `\\{name}`"),
                )),
            },
        }
    }

    fn parse_root_degree(&mut self) -> Result<MathNode, MarkupError> {
        let open = self.bump().expect("peeked `[`");
        let items = self.parse_seq(true)?;
        if self.peek_kind() != Some(&TokenKind::OpChar(']')) {
            return Err(MarkupError::new(
                MarkupErrorKind::UnbalancedBrace,
                open.span.start,
                "unmatched `[` in `\\sqrt[...]`",
            ));
        }
        self.bump();
        if items.is_empty() {
            return Err(MarkupError::new(
                MarkupErrorKind::EmptyArgument,
                open.span.start,
                "`\\sqrt[]` has an empty degree",
            ));
        }
        Ok(make_row(items, Span::new(open.span.start, self.last_end)))
    }

    fn parse_delimiter(&mut self, owner: &Token) -> Result<char, MarkupError> {
        let Some(tok) = self.bump() else {
            return Err(MarkupError::new(
                MarkupErrorKind::EmptyArgument,
                owner.span.start,
                "expected a delimiter after `\\left`/`\\right`",
            ));
        };
        let delim = match &tok.kind {
            TokenKind::OpChar(c) if "()[]|.{}\u{2016}".contains(*c) => Some(*c),
            TokenKind::Command(name) if name == "langle" => Some('\u{27E8}'),
            TokenKind::Command(name) if name == "rangle" => Some('\u{27E9}'),
            _ => None,
        };
        delim.ok_or_else(|| {
            MarkupError::new(
                MarkupErrorKind::StrayCharacter,
                tok.span.start,
                "not a valid delimiter; use one of ( ) [ ] | . \\{ \\} \\langle \\rangle",
            )
        })
    }

    fn parse_left_right(&mut self, left_tok: &Token) -> Result<MathNode, MarkupError> {
        self.enter(left_tok.span.start)?;
        let left = self.parse_delimiter(left_tok)?;
        let body_start = self.here();
        let items = self.parse_seq(false)?;
        let right_tok = match self.peek() {
            Some(Token {
                kind: TokenKind::Command(name),
                ..
            }) if name == "right" => self.bump().expect("peeked"),
            _ => {
                return Err(MarkupError::new(
                    MarkupErrorKind::UnterminatedEnvironment,
                    left_tok.span.start,
                    "`\\left` without a matching `\\right`",
                ))
            }
        };
        let right = self.parse_delimiter(&right_tok)?;
        self.leave();
        let body_span = match (items.first(), items.last()) {
            (Some(a), Some(b)) => a.span.join(&b.span),
            _ => Span::empty(body_start),
        };
        Ok(MathNode::new(
            NodeKind::Delimited {
                left,
                body: Box::new(make_row(items, body_span)),
                right,
            },
            Span::new(left_tok.span.start, self.last_end),
        ))
    }

    /// Reads `{name}` after `\begin` or `\end`.
    fn parse_env_name(&mut self, owner: &Token) -> Result<String, MarkupError> {
        let bad = |at| {
            MarkupError::new(
                MarkupErrorKind::EmptyArgument,
                at,
                "expected an environment name in braces",
            )
        };
        match self.bump() {
            Some(Token {
                kind: TokenKind::LBrace,
                ..
            }) => {}
            _ => return Err(bad(owner.span.start)),
        }
        let mut name = String::new();
        loop {
            match self.bump().map(|t| t.kind) {
                Some(TokenKind::Letter(c)) => name.push(c),
                Some(TokenKind::OpChar('*')) => name.push('*'),
                Some(TokenKind::RBrace) if !name.is_empty() => return Ok(name),
                _ => return Err(bad(owner.span.start)),
            }
        }
    }

    fn parse_matrix_env(&mut self, begin: &Token) -> Result<MathNode, MarkupError> {
        let start = begin.span.start;
        let name = self.parse_env_name(begin)?;
        let fences = match name.as_str() {
            "matrix" => None,
            "pmatrix" => Some(('(', ')')),
            "bmatrix" => Some(('[', ']')),
            "vmatrix" => Some(('|', '|')),
            other => {
                return Err(MarkupError::new(
                    MarkupErrorKind::UnknownCommand,
                    start,
                    format!("unknown environment `{other}`"),
                ))
            }
        };
        self.enter(start)?;
        let rows = self.parse_rows(None)?;
        let end_tok = match self.peek() {
            Some(Token {
                kind: TokenKind::Command(cmd),
                ..
            }) if cmd == "end" => self.bump().expect("peeked"),
            _ => {
                return Err(MarkupError::new(
                    MarkupErrorKind::UnterminatedEnvironment,
                    start,
                    format!("`\\begin{{{name}}}` is never closed"),
                ))
            }
        };
        let end_name = self.parse_env_name(&end_tok)?;
        if end_name != name {
            return Err(MarkupError::new(
                MarkupErrorKind::UnterminatedEnvironment,
                start,
                format!("`\\begin{{{name}}}` is closed by `\\end{{{end_name}}}`"),
            ));
        }
        self.leave();
        let span = Span::new(start, self.last_end);
        let width = rows.iter().map(Vec::len).max().unwrap_or(0);
        let table = MathNode::new(
            NodeKind::Table {
                colspec: vec![ColumnAlign::Center; width],
                rows,
            },
            span,
        );
        Ok(match fences {
            None => table,
            Some((left, right)) => MathNode::new(
                NodeKind::Delimited {
                    left,
                    body: Box::new(table),
                    right,
                },
                span,
            ),
        })
    }

    /// Parses `&`/`\\` separated cells until a token that closes the rows.
    ///
    /// With `max_columns`, rows wider than that fail with `BadColumnSpec`, and
    /// `\hline` is accepted (and ignored) at the start of a row.
    fn parse_rows(
        &mut self,
        max_columns: Option<usize>,
    ) -> Result<Vec<Vec<MathNode>>, MarkupError> {
        let mut rows = Vec::new();
        let mut row = Vec::new();
        loop {
            if row.is_empty() && max_columns.is_some() {
                while matches!(self.peek_kind(), Some(TokenKind::Command(n)) if n == "hline") {
                    self.bump();
                }
            }
            let cell_start = self.here();
            let items = self.parse_seq(false)?;
            let span = match (items.first(), items.last()) {
                (Some(a), Some(b)) => a.span.join(&b.span),
                _ => Span::empty(cell_start),
            };
            row.push(make_row(items, span));
            match self.peek_kind() {
                Some(TokenKind::Ampersand) => {
                    let amp = self.bump().expect("peeked");
                    if let Some(max) = max_columns {
                        if row.len() >= max {
                            return Err(MarkupError::new(
                                MarkupErrorKind::BadColumnSpec,
                                amp.span.start,
                                format!("row has more cells than the {max} declared columns"),
                            ));
                        }
                    }
                }
                Some(TokenKind::RowBreak) => {
                    self.bump();
                    rows.push(std::mem::take(&mut row));
                }
                _ => break,
            }
        }
        // A trailing `\\` (or an empty body) leaves one empty cell behind.
        if !(row.len() == 1 && row[0].is_empty_row()) {
            rows.push(row);
        }
        Ok(rows)
    }
}

fn make_row(mut items: Vec<MathNode>, span: Span) -> MathNode {
    if items.len() == 1 {
        return items.pop().expect("one item");
    }
    let span = if span.is_empty() {
        match (items.first(), items.last()) {
            (Some(a), Some(b)) => a.span.join(&b.span),
            _ => span,
        }
    } else {
        span
    };
    MathNode::new(NodeKind::Row(items), span)
}
