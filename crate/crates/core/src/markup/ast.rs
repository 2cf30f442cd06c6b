use serde::{Deserialize, Serialize};

use super::pos::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColumnAlign {
    #[serde(rename = "l")]
    Left,
    #[serde(rename = "c")]
    Center,
    #[serde(rename = "r")]
    Right,
}

impl ColumnAlign {
    pub fn from_spec_char(c: char) -> Option<ColumnAlign> {
        match c {
            'l' => Some(ColumnAlign::Left),
            'c' => Some(ColumnAlign::Center),
            'r' => Some(ColumnAlign::Right),
            _ => None,
        }
    }

    pub fn as_mathml(self) -> &'static str {
        match self {
            ColumnAlign::Left => "left",
            ColumnAlign::Center => "center",
            ColumnAlign::Right => "right",
        }
    }
}

/// Fence character used for the empty delimiter `\left.` / `\right.`.
pub const NULL_DELIMITER: char = '.';

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MathNode {
    pub kind: NodeKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NodeKind {
    Row(Vec<MathNode>),
    Ident(char),
    Num(String),
    Op(char),
    Frac {
        numerator: Box<MathNode>,
        denominator: Box<MathNode>,
    },
    Root {
        degree: Option<Box<MathNode>>,
        radicand: Box<MathNode>,
    },
    Script {
        base: Box<MathNode>,
        sub: Option<Box<MathNode>>,
        sup: Option<Box<MathNode>>,
    },
    Symbol {
        name: String,
        codepoint: char,
        operator: bool,
    },
    BigOp {
        name: String,
        codepoint: char,
        lower: Option<Box<MathNode>>,
        upper: Option<Box<MathNode>>,
    },
    Delimited {
        left: char,
        body: Box<MathNode>,
        right: char,
    },
    Table {
        colspec: Vec<ColumnAlign>,
        rows: Vec<Vec<MathNode>>,
    },
}

impl MathNode {
    pub fn new(kind: NodeKind, span: Span) -> MathNode {
        MathNode { kind, span }
    }

    /// Direct children in source order.
    pub fn children(&self) -> Vec<&MathNode> {
        match &self.kind {
            NodeKind::Row(items) => items.iter().collect(),
            NodeKind::Ident(_) | NodeKind::Num(_) | NodeKind::Op(_) | NodeKind::Symbol { .. } => {
                Vec::new()
            }
            NodeKind::Frac {
                numerator,
                denominator,
            } => vec![numerator, denominator],
            NodeKind::Root { degree, radicand } => {
                degree.iter().map(|d| &**d).chain([&**radicand]).collect()
            }
            NodeKind::Script { base, sub, sup } => [Some(base), sub.as_ref(), sup.as_ref()]
                .into_iter()
                .flatten()
                .map(|b| &**b)
                .collect(),
            NodeKind::BigOp { lower, upper, .. } => {
                lower.iter().chain(upper.iter()).map(|b| &**b).collect()
            }
            NodeKind::Delimited { body, .. } => vec![body],
            NodeKind::Table { rows, .. } => rows.iter().flatten().collect(),
        }
    }

    /// Height of the tree; a leaf has depth 1.
    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn is_empty_row(&self) -> bool {
        matches!(&self.kind, NodeKind::Row(items) if items.is_empty())
    }
}
