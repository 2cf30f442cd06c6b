//! Compiler for the supported LaTeX subset: lexing, parsing, document
//! segmentation and MathML/HTML rendering.
//!
//! See `docs/markup.md` for the accepted grammar and the emitted dialect.

mod ast;
mod error;
mod escape;
mod lexer;
mod parser;
mod pos;
mod render;
mod segment;
mod symbols;

pub use ast::{ColumnAlign, MathNode, NodeKind, NULL_DELIMITER};
pub use error::{MarkupError, MarkupErrorKind};
pub use escape::escape_text;
pub use lexer::{tokenize, LexMode, Token, TokenKind};
pub use parser::{parse_formula, parse_math, MAX_NESTING};
pub use pos::{SourcePos, Span};
pub use render::{render_document, render_math_node, RenderedFragment, RENDERER_VERSION};
pub use segment::{segment_bytes, segment_document, Document, Segment, SegmentKind};
pub use symbols::{symbol_lookup, symbol_names, SymbolClass, SymbolInfo};

/// Segments and renders `source` in one step.
pub fn compile(source: &str) -> Result<RenderedFragment, MarkupError> {
    segment_document(source).map(|doc| render_document(&doc))
}
