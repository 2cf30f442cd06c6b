use std::fmt;

use serde::{Deserialize, Serialize};

/// A location in a source text.
///
/// `offset` is a byte index; `line` and `column` are 1-based, with columns
/// counted in Unicode scalar values so editors can place a caret directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourcePos {
    pub offset: usize,
    pub line: u32,
    pub column: u32,
}

impl SourcePos {
    pub const ORIGIN: SourcePos = SourcePos {
        offset: 0,
        line: 1,
        column: 1,
    };

    /// Computes the position of byte `offset` in `source` by scanning from the start.
    ///
    /// Offsets past the end clamp to the end; offsets inside a multi-byte
    /// character resolve to the start of that character.
    pub fn from_offset(source: &str, offset: usize) -> SourcePos {
        let offset = floor_char_boundary(source, offset.min(source.len()));
        let mut line = 1;
        let mut column = 1;
        for ch in source[..offset].chars() {
            if ch == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        SourcePos {
            offset,
            line,
            column,
        }
    }

    /// Advances this position over `text`, which must start at `self.offset`.
    pub fn advance(self, text: &str) -> SourcePos {
        let mut pos = self;
        for ch in text.chars() {
            pos.offset += ch.len_utf8();
            if ch == '\n' {
                pos.line += 1;
                pos.column = 1;
            } else {
                pos.column += 1;
            }
        }
        pos
    }
}

impl Default for SourcePos {
    fn default() -> Self {
        SourcePos::ORIGIN
    }
}

impl fmt::Display for SourcePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Half-open source range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: SourcePos,
    pub end: SourcePos,
}

impl Span {
    pub fn new(start: SourcePos, end: SourcePos) -> Span {
        debug_assert!(start.offset <= end.offset);
        Span { start, end }
    }

    pub fn empty(at: SourcePos) -> Span {
        Span { start: at, end: at }
    }

    pub fn len(&self) -> usize {
        self.end.offset - self.start.offset
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start.offset <= other.start.offset && other.end.offset <= self.end.offset
    }

    /// Smallest span covering both.
    pub fn join(&self, other: &Span) -> Span {
        Span {
            start: if other.start.offset < self.start.offset {
                other.start
            } else {
                self.start
            },
            end: if other.end.offset > self.end.offset {
                other.end
            } else {
                self.end
            },
        }
    }

    pub fn slice<'s>(&self, source: &'s str) -> &'s str {
        &source[self.start.offset..self.end.offset]
    }
}

pub(crate) fn floor_char_boundary(s: &str, mut index: usize) -> usize {
    while index > 0 && !s.is_char_boundary(index) {
        index -= 1;
    }
    index
}
