//! MathML Core / HTML emission.
//!
//! Output is compact (no insignificant whitespace) and a pure function of the
//! input tree, so identical sources always produce identical bytes.

use serde::{Deserialize, Serialize};

use super::ast::{ColumnAlign, MathNode, NodeKind, NULL_DELIMITER};
use super::escape::{push_escaped, push_escaped_char};
use super::segment::{Document, SegmentKind};
use crate::hash::{content_hash, SourceHash};

/// Bumped whenever the emitted HTML changes for some input, invalidating
/// cached fragments.
pub const RENDERER_VERSION: u32 = 1;

/// Compiled HTML for one markup source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedFragment {
    pub html: String,
    pub source_hash: SourceHash,
    pub renderer_version: u32,
}

impl RenderedFragment {
    /// True if this fragment was rendered from `source` by the current renderer.
    pub fn is_current_for(&self, source: &str) -> bool {
        self.renderer_version == RENDERER_VERSION && self.source_hash == content_hash(source)
    }
}

/// Renders one formula as a `<math>` element.
pub fn render_math_node(node: &MathNode, display: bool) -> String {
    let mut out = String::new();
    push_math(&mut out, node, display);
    out
}

/// Renders a segmented document to an HTML fragment.
///
/// Prose and inline formulas flow into `<p>` paragraphs (a blank line starts
/// a new one); display formulas, code and tables are block-level siblings.
pub fn render_document(doc: &Document) -> RenderedFragment {
    let mut html = String::new();
    let mut para = String::new();
    for segment in &doc.segments {
        match &segment.kind {
            SegmentKind::Text(text) => {
                for (i, piece) in split_paragraphs(text).into_iter().enumerate() {
                    if i > 0 {
                        close_paragraph(&mut html, &mut para);
                    }
                    push_escaped(&mut para, piece);
                }
            }
            SegmentKind::InlineMath(node) => push_math(&mut para, node, false),
            SegmentKind::DisplayMath(node) | SegmentKind::TableBlock(node) => {
                close_paragraph(&mut html, &mut para);
                push_math(&mut html, node, true);
            }
            SegmentKind::CodeBlock(code) => {
                close_paragraph(&mut html, &mut para);
                html.push_str("<pre><code>");
                push_escaped(&mut html, code);
                html.push_str("</code></pre>");
            }
        }
    }
    close_paragraph(&mut html, &mut para);
    RenderedFragment {
        html,
        source_hash: content_hash(&doc.source),
        renderer_version: RENDERER_VERSION,
    }
}

fn close_paragraph(html: &mut String, para: &mut String) {
    let body = para.trim_matches(|c: char| c.is_ascii_whitespace());
    if !body.is_empty() {
        html.push_str("<p>");
        html.push_str(body);
        html.push_str("</p>");
    }
    para.clear();
}

/// Splits text at blank lines (a newline, optional spaces/tabs, a newline).
fn split_paragraphs(text: &str) -> Vec<&str> {
    let mut pieces = Vec::new();
    let mut piece_start = 0;
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'\n' {
            let mut j = i + 1;
            while j < bytes.len() && matches!(bytes[j], b' ' | b'\t' | b'\r') {
                j += 1;
            }
            if j < bytes.len() && bytes[j] == b'\n' {
                pieces.push(&text[piece_start..i]);
                while j < bytes.len() && matches!(bytes[j], b'\n' | b' ' | b'\t' | b'\r') {
                    j += 1;
                }
                piece_start = j;
                i = j;
                continue;
            }
        }
        i += 1;
    }
    pieces.push(&text[piece_start..]);
    pieces
}

fn push_math(out: &mut String, node: &MathNode, display: bool) {
    out.push_str(if display {
        r#"<math display="block">"#
    } else {
        r#"<math display="inline">"#
    });
    push_row_contents(out, node, display);
    out.push_str("</math>");
}

/// Emits a node where an inferred row is allowed (`math`, `mtd`, fences):
/// a `Row` contributes its children without an `mrow` wrapper.
fn push_row_contents(out: &mut String, node: &MathNode, display: bool) {
    match &node.kind {
        NodeKind::Row(items) => items.iter().for_each(|n| push_node(out, n, display)),
        _ => push_node(out, node, display),
    }
}

fn leaf(out: &mut String, tag: &str, text: &str) {
    out.push('<');
    out.push_str(tag);
    out.push('>');
    push_escaped(out, text);
    out.push_str("</");
    out.push_str(tag);
    out.push('>');
}

fn leaf_char(out: &mut String, tag: &str, c: char) {
    out.push('<');
    out.push_str(tag);
    out.push('>');
    push_escaped_char(out, c);
    out.push_str("</");
    out.push_str(tag);
    out.push('>');
}

fn wrap(out: &mut String, tag: &str, display: bool, children: &[&MathNode]) {
    out.push('<');
    out.push_str(tag);
    out.push('>');
    for child in children {
        push_node(out, child, display);
    }
    out.push_str("</");
    out.push_str(tag);
    out.push('>');
}

/// Emits a node as exactly one MathML element.
fn push_node(out: &mut String, node: &MathNode, display: bool) {
    match &node.kind {
        NodeKind::Row(items) => {
            out.push_str("<mrow>");
            items.iter().for_each(|n| push_node(out, n, display));
            out.push_str("</mrow>");
        }
        NodeKind::Ident(c) => leaf_char(out, "mi", *c),
        NodeKind::Num(n) => leaf(out, "mn", n),
        NodeKind::Op(c) => leaf_char(out, "mo", *c),
        NodeKind::Symbol {
            codepoint,
            operator,
            ..
        } => leaf_char(out, if *operator { "mo" } else { "mi" }, *codepoint),
        NodeKind::Frac {
            numerator,
            denominator,
        } => wrap(out, "mfrac", display, &[numerator, denominator]),
        NodeKind::Root {
            degree: None,
            radicand,
        } => wrap(out, "msqrt", display, &[radicand]),
        NodeKind::Root {
            degree: Some(degree),
            radicand,
        } => wrap(out, "mroot", display, &[radicand, degree]),
        NodeKind::Script { base, sub, sup } => push_scripted(
            out,
            display,
            "msub",
            "msup",
            "msubsup",
            |out| push_node(out, base, display),
            sub,
            sup,
        ),
        NodeKind::BigOp {
            codepoint,
            lower,
            upper,
            ..
        } => {
            let (sub_tag, sup_tag, both_tag) = if display {
                ("munder", "mover", "munderover")
            } else {
                ("msub", "msup", "msubsup")
            };
            push_scripted(
                out,
                display,
                sub_tag,
                sup_tag,
                both_tag,
                |out| leaf_char(out, "mo", *codepoint),
                lower,
                upper,
            )
        }
        NodeKind::Delimited { left, body, right } => {
            out.push_str("<mrow>");
            push_fence(out, *left, "prefix");
            push_row_contents(out, body, display);
            push_fence(out, *right, "postfix");
            out.push_str("</mrow>");
        }
        NodeKind::Table { colspec, rows } => {
            out.push_str("<mtable>");
            for row in rows {
                out.push_str("<mtr>");
                for (i, align) in colspec.iter().enumerate() {
                    push_cell_open(out, *align);
                    if let Some(cell) = row.get(i) {
                        push_row_contents(out, cell, display);
                    }
                    out.push_str("</mtd>");
                }
                out.push_str("</mtr>");
            }
            out.push_str("</mtable>");
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn push_scripted(
    out: &mut String,
    display: bool,
    sub_tag: &str,
    sup_tag: &str,
    both_tag: &str,
    base: impl FnOnce(&mut String),
    sub: &Option<Box<MathNode>>,
    sup: &Option<Box<MathNode>>,
) {
    let tag = match (sub, sup) {
        (None, None) => {
            base(out);
            return;
        }
        (Some(_), None) => sub_tag,
        (None, Some(_)) => sup_tag,
        (Some(_), Some(_)) => both_tag,
    };
    out.push('<');
    out.push_str(tag);
    out.push('>');
    base(out);
    for script in [sub, sup].into_iter().flatten() {
        push_node(out, script, display);
    }
    out.push_str("</");
    out.push_str(tag);
    out.push('>');
}

fn push_fence(out: &mut String, fence: char, form: &str) {
    if fence == NULL_DELIMITER {
        return;
    }
    out.push_str(r#"<mo fence="true" stretchy="true" form=""#);
    out.push_str(form);
    out.push_str(r#"">"#);
    push_escaped_char(out, fence);
    out.push_str("</mo>");
}

fn push_cell_open(out: &mut String, align: ColumnAlign) {
    out.push_str(r#"<mtd columnalign=""#);
    out.push_str(align.as_mathml());
    out.push_str(r#"">"#);
}
