use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolClass {
    /// Rendered as an identifier (`mi`).
    Letter,
    /// Rendered as an operator (`mo`).
    Operator,
    /// Takes limits (`\sum_{..}^{..}`).
    BigOp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymbolInfo {
    pub codepoint: char,
    pub class: SymbolClass,
}

use SymbolClass::{BigOp, Letter, Operator};

// Sorted by name for binary search; `symbol_table_is_sorted` guards this.
static SYMBOLS: &[(&str, char, SymbolClass)] = &[
    ("Delta", '\u{0394}', Letter),
    ("Gamma", '\u{0393}', Letter),
    ("Lambda", '\u{039B}', Letter),
    ("Leftarrow", '\u{21D0}', Operator),
    ("Omega", '\u{03A9}', Letter),
    ("Phi", '\u{03A6}', Letter),
    ("Pi", '\u{03A0}', Letter),
    ("Psi", '\u{03A8}', Letter),
    ("Rightarrow", '\u{21D2}', Operator),
    ("Sigma", '\u{03A3}', Letter),
    ("Theta", '\u{0398}', Letter),
    ("Upsilon", '\u{03A5}', Letter),
    ("Xi", '\u{039E}', Letter),
    ("alpha", '\u{03B1}', Letter),
    ("approx", '\u{2248}', Operator),
    ("beta", '\u{03B2}', Letter),
    ("cap", '\u{2229}', Operator),
    ("cdot", '\u{22C5}', Operator),
    ("cdots", '\u{22EF}', Operator),
    ("chi", '\u{03C7}', Letter),
    ("cup", '\u{222A}', Operator),
    ("delta", '\u{03B4}', Letter),
    ("div", '\u{00F7}', Operator),
    ("epsilon", '\u{03F5}', Letter),
    ("equiv", '\u{2261}', Operator),
    ("eta", '\u{03B7}', Letter),
    ("gamma", '\u{03B3}', Letter),
    ("ge", '\u{2265}', Operator),
    ("geq", '\u{2265}', Operator),
    ("in", '\u{2208}', Operator),
    ("infty", '\u{221E}', Letter),
    ("int", '\u{222B}', BigOp),
    ("iota", '\u{03B9}', Letter),
    ("kappa", '\u{03BA}', Letter),
    ("lambda", '\u{03BB}', Letter),
    ("ldots", '\u{2026}', Operator),
    ("le", '\u{2264}', Operator),
    ("leftarrow", '\u{2190}', Operator),
    ("leq", '\u{2264}', Operator),
    ("mp", '\u{2213}', Operator),
    ("mu", '\u{03BC}', Letter),
    ("nabla", '\u{2207}', Letter),
    ("ne", '\u{2260}', Operator),
    ("neq", '\u{2260}', Operator),
    ("nu", '\u{03BD}', Letter),
    ("omega", '\u{03C9}', Letter),
    ("partial", '\u{2202}', Letter),
    ("phi", '\u{03D5}', Letter),
    ("pi", '\u{03C0}', Letter),
    ("pm", '\u{00B1}', Operator),
    ("prod", '\u{220F}', BigOp),
    ("psi", '\u{03C8}', Letter),
    ("rho", '\u{03C1}', Letter),
    ("rightarrow", '\u{2192}', Operator),
    ("sigma", '\u{03C3}', Letter),
    ("subset", '\u{2282}', Operator),
    ("sum", '\u{2211}', BigOp),
    ("tau", '\u{03C4}', Letter),
    ("theta", '\u{03B8}', Letter),
    ("times", '\u{00D7}', Operator),
    ("to", '\u{2192}', Operator),
    ("upsilon", '\u{03C5}', Letter),
    ("varepsilon", '\u{03B5}', Letter),
    ("varphi", '\u{03C6}', Letter),
    ("varpi", '\u{03D6}', Letter),
    ("varrho", '\u{03F1}', Letter),
    ("varsigma", '\u{03C2}', Letter),
    ("vartheta", '\u{03D1}', Letter),
    ("xi", '\u{03BE}', Letter),
    ("zeta", '\u{03B6}', Letter),
];

/// Looks up a symbol command by name (without the backslash).
pub fn symbol_lookup(name: &str) -> Option<SymbolInfo> {
    SYMBOLS
        .binary_search_by(|(n, _, _)| n.cmp(&name))
        .ok()
        .map(|i| SymbolInfo {
            codepoint: SYMBOLS[i].1,
            class: SYMBOLS[i].2,
        })
}

/// Every supported symbol command, in name order.
pub fn symbol_names() -> impl Iterator<Item = &'static str> {
    SYMBOLS.iter().map(|(n, _, _)| *n)
}
