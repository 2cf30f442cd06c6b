use std::fmt;

use serde::{Deserialize, Serialize};

use super::pos::{floor_char_boundary, SourcePos};

const SNIPPET_CHARS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkupErrorKind {
    UnbalancedBrace,
    UnknownCommand,
    DoubleScript,
    UnterminatedMath,
    UnterminatedEnvironment,
    EmptyArgument,
    BadColumnSpec,
    StrayCharacter,
    NestingTooDeep,
}

impl MarkupErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MarkupErrorKind::UnbalancedBrace => "unbalanced_brace",
            MarkupErrorKind::UnknownCommand => "unknown_command",
            MarkupErrorKind::DoubleScript => "double_script",
            MarkupErrorKind::UnterminatedMath => "unterminated_math",
            MarkupErrorKind::UnterminatedEnvironment => "unterminated_environment",
            MarkupErrorKind::EmptyArgument => "empty_argument",
            MarkupErrorKind::BadColumnSpec => "bad_column_spec",
            MarkupErrorKind::StrayCharacter => "stray_character",
            MarkupErrorKind::NestingTooDeep => "nesting_too_deep",
        }
    }
}

impl fmt::Display for MarkupErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A compile error in question markup, positioned for display in the editor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{pos}: {message}")]
pub struct MarkupError {
    pub pos: SourcePos,
    pub kind: MarkupErrorKind,
    pub message: String,
    /// Up to 40 characters of source around `pos`. Empty until
    /// [`MarkupError::with_snippet`] is called with the source.
    pub snippet: String,
}

impl MarkupError {
    pub fn new(kind: MarkupErrorKind, pos: SourcePos, message: impl Into<String>) -> MarkupError {
        let message = message.into();
        debug_assert!(!message.is_empty());
        MarkupError {
            pos,
            kind,
            message,
            snippet: String::new(),
        }
    }

    /// Fills `snippet` from the source `pos` points into.
    pub fn with_snippet(mut self, source: &str) -> MarkupError {
        self.snippet = snippet_around(source, self.pos.offset);
        self
    }
}

fn snippet_around(source: &str, offset: usize) -> String {
    let offset = floor_char_boundary(source, offset.min(source.len()));
    let before: Vec<char> = source[..offset]
        .chars()
        .rev()
        .take(SNIPPET_CHARS / 2)
        .collect();
    let after = SNIPPET_CHARS - before.len();
    before
        .into_iter()
        .rev()
        .chain(source[offset..].chars().take(after))
        .collect()
}
