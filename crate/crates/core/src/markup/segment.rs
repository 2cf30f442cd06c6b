//! Splits question text into prose, formulas, code and tables.
//!
//! Text mode recognizes:
//!
//! * `$...$` inline formulas (`\$` is a literal dollar; `$$` is rejected),
//! * `\begin{equation}...\end{equation}` display formulas,
//! * `\begin{verbatim}...\end{verbatim}` code, kept byte-for-byte,
//! * `\begin{tabular}{colspec}...\end{tabular}` tables.
//!
//! Any other backslash is ordinary text.

use serde::{Deserialize, Serialize};

use super::ast::{ColumnAlign, MathNode, NodeKind};
use super::error::{MarkupError, MarkupErrorKind};
use super::lexer::{tokenize_range, LexMode};
use super::parser::{parse_math_at, parse_table_body};
use super::pos::{SourcePos, Span};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub source: String,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum SegmentKind {
    /// Prose with `\$` escapes already resolved.
    Text(String),
    InlineMath(MathNode),
    DisplayMath(MathNode),
    CodeBlock(String),
    /// Always holds a `NodeKind::Table`.
    TableBlock(MathNode),
}

impl Document {
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

/// Segments `source`, parsing every formula and table it contains.
pub fn segment_document(source: &str) -> Result<Document, MarkupError> {
    Segmenter::new(source)
        .run()
        .map(|segments| Document {
            source: source.to_string(),
            segments,
        })
        .map_err(|e| e.with_snippet(source))
}

/// Byte-level entry point for untrusted input: invalid UTF-8 is reported as a
/// `StrayCharacter` at the first invalid byte.
pub fn segment_bytes(bytes: &[u8]) -> Result<Document, MarkupError> {
    match std::str::from_utf8(bytes) {
        Ok(source) => segment_document(source),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).expect("valid prefix");
            Err(MarkupError::new(
                MarkupErrorKind::StrayCharacter,
                SourcePos::from_offset(valid, valid.len()),
                "input is not valid UTF-8",
            )
            .with_snippet(valid))
        }
    }
}

const END_EQUATION: &str = "\\end{equation}";
const END_VERBATIM: &str = "\\end{verbatim}";
const END_TABULAR: &str = "\\end{tabular}";

struct Segmenter<'s> {
    source: &'s str,
    cursor: usize,
    pos: SourcePos,
    text: String,
    text_start: Option<SourcePos>,
    segments: Vec<Segment>,
}

impl<'s> Segmenter<'s> {
    fn new(source: &'s str) -> Segmenter<'s> {
        Segmenter {
            source,
            cursor: 0,
            pos: SourcePos::ORIGIN,
            text: String::new(),
            text_start: None,
            segments: Vec::new(),
        }
    }

    fn rest(&self) -> &'s str {
        &self.source[self.cursor..]
    }

    fn advance_to(&mut self, offset: usize) -> SourcePos {
        self.pos = self.pos.advance(&self.source[self.cursor..offset]);
        self.cursor = offset;
        self.pos
    }

    fn push_text(&mut self, s: &str, raw_len: usize) {
        if self.text_start.is_none() {
            self.text_start = Some(self.pos);
        }
        self.text.push_str(s);
        self.advance_to(self.cursor + raw_len);
    }

    fn flush_text(&mut self) {
        if let Some(start) = self.text_start.take() {
            self.segments.push(Segment {
                kind: SegmentKind::Text(std::mem::take(&mut self.text)),
                span: Span::new(start, self.pos),
            });
        }
    }

    fn push_block(&mut self, kind: SegmentKind, start: SourcePos) {
        self.segments.push(Segment {
            kind,
            span: Span::new(start, self.pos),
        });
    }

    fn run(mut self) -> Result<Vec<Segment>, MarkupError> {
        while let Some(ch) = self.rest().chars().next() {
            let rest = self.rest();
            if rest.starts_with("\\$") {
                self.push_text("$", 2);
            } else if rest.starts_with("$$") {
                return Err(MarkupError::new(
                    MarkupErrorKind::StrayCharacter,
                    self.pos,
                    "`$$` is not supported; use \\begin{equation}...\\end{equation} for display math",
                ));
            } else if ch == '$' {
                self.flush_text();
                self.inline_math()?;
            } else if rest.starts_with("\\begin{") {
                self.flush_text();
                self.environment()?;
            } else if rest.starts_with("\\end{") {
                return Err(MarkupError::new(
                    MarkupErrorKind::StrayCharacter,
                    self.pos,
                    "`\\end` without a matching `\\begin`",
                ));
            } else {
                let len = ch.len_utf8();
                self.push_text(&rest[..len], len);
            }
        }
        self.flush_text();
        Ok(self.segments)
    }

    fn inline_math(&mut self) -> Result<(), MarkupError> {
        let open = self.pos;
        let body_start = self.cursor + 1;
        let Some(close) = find_closing_dollar(&self.source[body_start..]).map(|i| body_start + i)
        else {
            return Err(self.unterminated_math(open, body_start));
        };
        let body_pos = self.advance_to(body_start);
        let node = self.parse_math_range(body_start, close, body_pos)?;
        self.advance_to(close + 1);
        self.push_block(SegmentKind::InlineMath(node), open);
        Ok(())
    }

    /// An unclosed `$`. An unbalanced brace inside the would-be formula is the
    /// more useful report (`${` points at the brace), so it wins.
    fn unterminated_math(&self, open: SourcePos, body_start: usize) -> MarkupError {
        let body_pos = open.advance("$");
        match self.parse_math_range(body_start, self.source.len(), body_pos) {
            Err(e) if e.kind == MarkupErrorKind::UnbalancedBrace => e,
            _ => MarkupError::new(
                MarkupErrorKind::UnterminatedMath,
                open,
                "`$` opens a formula that is never closed (write `\\$` for a literal dollar)",
            ),
        }
    }

    fn parse_math_range(
        &self,
        start: usize,
        end: usize,
        start_pos: SourcePos,
    ) -> Result<MathNode, MarkupError> {
        let tokens = tokenize_range(self.source, start..end, start_pos, LexMode::Math)?;
        parse_math_at(&tokens, start_pos)
    }

    fn environment(&mut self) -> Result<(), MarkupError> {
        let begin = self.pos;
        let name_start = self.cursor + "\\begin{".len();
        let Some(name_len) = self.source[name_start..].find('}') else {
            return Err(MarkupError::new(
                MarkupErrorKind::UnterminatedEnvironment,
                begin,
                "`\\begin{` is missing its closing `}`",
            ));
        };
        let name = &self.source[name_start..name_start + name_len];
        let header_end = name_start + name_len + 1;
        match name {
            "equation" => {
                let (body_end, env_end) = self.find_end(header_end, END_EQUATION, begin, name)?;
                let body_pos = self.advance_to(header_end);
                let node = self.parse_math_range(header_end, body_end, body_pos)?;
                self.advance_to(env_end);
                self.push_block(SegmentKind::DisplayMath(node), begin);
            }
            "verbatim" => {
                let (body_end, env_end) = self.find_end(header_end, END_VERBATIM, begin, name)?;
                let body = self.source[header_end..body_end].to_string();
                self.advance_to(env_end);
                self.push_block(SegmentKind::CodeBlock(body), begin);
            }
            "tabular" => self.tabular(begin, header_end)?,
            other => {
                return Err(MarkupError::new(
                    MarkupErrorKind::UnknownCommand,
                    begin,
                    format!("unknown environment `{other}`"),
                ))
            }
        }
        Ok(())
    }

    /// Returns `(body_end, env_end)` offsets for the closing `end_marker`.
    fn find_end(
        &self,
        from: usize,
        end_marker: &str,
        begin: SourcePos,
        name: &str,
    ) -> Result<(usize, usize), MarkupError> {
        self.source[from..]
            .find(end_marker)
            .map(|i| (from + i, from + i + end_marker.len()))
            .ok_or_else(|| {
                MarkupError::new(
                    MarkupErrorKind::UnterminatedEnvironment,
                    begin,
                    format!("`\\begin{{{name}}}` is never closed by `\\end{{{name}}}`"),
                )
            })
    }

    fn tabular(&mut self, begin: SourcePos, header_end: usize) -> Result<(), MarkupError> {
        let spec_pos = self.pos.advance(&self.source[self.cursor..header_end]);
        let bad_spec = |at: SourcePos, msg: &str| {
            MarkupError::new(MarkupErrorKind::BadColumnSpec, at, msg.to_string())
        };
        if !self.source[header_end..].starts_with('{') {
            return Err(bad_spec(
                spec_pos,
                "`\\begin{tabular}` must be followed by a column spec such as `{lcr}`",
            ));
        }
        let Some(spec_len) = self.source[header_end + 1..].find('}') else {
            return Err(bad_spec(spec_pos, "column spec is missing its closing `}`"));
        };
        let spec = &self.source[header_end + 1..header_end + 1 + spec_len];
        let spec_start = spec_pos.advance("{");
        let mut colspec = Vec::new();
        for (i, c) in spec.char_indices() {
            if matches!(c, '|' | ' ') {
                continue;
            }
            colspec.push(ColumnAlign::from_spec_char(c).ok_or_else(|| {
                bad_spec(
                    spec_start.advance(&spec[..i]),
                    "column spec may only contain `l`, `c`, `r` and `|`",
                )
            })?);
        }
        if colspec.is_empty() {
            return Err(bad_spec(spec_pos, "column spec declares no columns"));
        }
        let body_start = header_end + 1 + spec_len + 1;
        let (body_end, env_end) = self.find_end(body_start, END_TABULAR, begin, "tabular")?;
        let body_pos = self.advance_to(body_start);
        let tokens = tokenize_range(self.source, body_start..body_end, body_pos, LexMode::Table)?;
        let rows = parse_table_body(&tokens, body_pos, colspec.len())?;
        self.advance_to(env_end);
        let node = MathNode::new(
            NodeKind::Table { colspec, rows },
            Span::new(begin, self.pos),
        );
        self.push_block(SegmentKind::TableBlock(node), begin);
        Ok(())
    }
}

/// Offset of the first `$` not escaped by a backslash.
fn find_closing_dollar(body: &str) -> Option<usize> {
    let mut chars = body.char_indices();
    while let Some((i, c)) = chars.next() {
        match c {
            '\\' => {
                chars.next();
            }
            '$' => return Some(i),
            _ => {}
        }
    }
    None
}
