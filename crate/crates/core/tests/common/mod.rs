//! Test-only helpers shared by the core integration tests and the
//! acceptance target: a generator of valid markup, a small XML reader for
//! checking emitted HTML, and MathML normalization for cross-checks.
#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::Rng;

const LETTERS: &[&str] = &["a", "b", "x", "y", "k", "n"];
const OPS: &[&str] = &["+", "-", "=", "*", "<", ">", "/", "(", ")", ","];
const SYMBOLS: &[&str] = &[
    "\\alpha", "\\beta", "\\pi", "\\Omega", "\\pm", "\\times", "\\leq", "\\infty", "\\cdot",
];
const BIG: &[&str] = &["\\sum", "\\prod", "\\int"];

/// A random formula accepted by the parser.
pub fn gen_formula<R: Rng>(rng: &mut R, depth: u32) -> String {
    let n = rng.random_range(1..=4);
    (0..n)
        .map(|_| gen_scripted(rng, depth))
        .collect::<Vec<_>>()
        .join(" ")
}

fn gen_scripted<R: Rng>(rng: &mut R, depth: u32) -> String {
    let mut s = gen_atom(rng, depth);
    match rng.random_range(0..6) {
        0 => s += &format!("^{{{}}}", gen_formula(rng, depth.saturating_sub(1))),
        1 => s += &format!("_{}", LETTERS.choose(rng).unwrap()),
        2 => s += &format!("_{{{}}}^{{{}}}", gen_atom(rng, 0), gen_atom(rng, 0)),
        _ => {}
    }
    s
}

fn gen_atom<R: Rng>(rng: &mut R, depth: u32) -> String {
    let choice = if depth == 0 {
        rng.random_range(0..4)
    } else {
        rng.random_range(0..9)
    };
    match choice {
        0 => LETTERS.choose(rng).unwrap().to_string(),
        1 => rng.random_range(0..1000).to_string(),
        2 => OPS.choose(rng).unwrap().to_string(),
        3 => SYMBOLS.choose(rng).unwrap().to_string(),
        4 => format!(
            "\\frac{{{}}}{{{}}}",
            gen_formula(rng, depth - 1),
            gen_formula(rng, depth - 1)
        ),
        5 => format!("\\sqrt{{{}}}", gen_formula(rng, depth - 1)),
        6 => format!("\\left( {} \\right)", gen_formula(rng, depth - 1)),
        7 => BIG.choose(rng).unwrap().to_string(),
        _ => {
            let cells: Vec<String> = (0..2).map(|_| gen_atom(rng, 0)).collect();
            format!(
                "\\begin{{pmatrix}} {} & {} \\\\ 1 & 0 \\end{{pmatrix}}",
                cells[0], cells[1]
            )
        }
    }
}

const WORDS: &[&str] = &[
    "Evaluate",
    "the",
    "sum",
    "if",
    "cost",
    "is",
    "x<y",
    "&",
    "\"quoted\"",
    "<b>",
    "\u{e9}t\u{e9}",
    "\u{3a9}",
];

/// A random document accepted by the segmenter, mixing every segment kind.
pub fn gen_document<R: Rng>(rng: &mut R) -> String {
    let n = rng.random_range(0..8);
    let mut doc = String::new();
    for _ in 0..n {
        match rng.random_range(0..8) {
            0..=2 => {
                let words = rng.random_range(1..6);
                for _ in 0..words {
                    doc += WORDS.choose(rng).unwrap();
                    doc += if rng.random_bool(0.2) { "\n" } else { " " };
                }
            }
            3 => doc += "\\$5 ",
            4 => doc += &format!("${}$", gen_formula(rng, 2)),
            5 => {
                doc += &format!(
                    "\\begin{{equation}}{}\\end{{equation}}",
                    gen_formula(rng, 2)
                )
            }
            6 => doc += "\\begin{verbatim}\nif x<1: y = {2} & $z\n\\end{verbatim}",
            _ => {
                doc += "\\begin{tabular}{l|c r}\n\\hline\n";
                doc += &format!(
                    "{} & {} & {} \\\\\n",
                    gen_atom(rng, 0),
                    gen_atom(rng, 0),
                    gen_atom(rng, 0)
                );
                doc += &format!("{} & {}\n", gen_atom(rng, 0), gen_atom(rng, 0));
                doc += "\\end{tabular}";
            }
        }
        if rng.random_bool(0.3) {
            doc += "\n\n";
        }
    }
    doc
}

#[derive(Debug, Clone, PartialEq)]
pub enum Xml {
    Element {
        name: String,
        attrs: Vec<(String, String)>,
        children: Vec<Xml>,
    },
    Text(String),
}

/// Parses a sequence of XML nodes. Attribute values must be double-quoted,
/// every element closed, and `&` used only in the five predefined or numeric
/// entities.
pub fn parse_xml(src: &str) -> Result<Vec<Xml>, String> {
    let mut p = XmlParser { src, pos: 0 };
    let nodes = p.nodes()?;
    if p.pos != src.len() {
        return Err(format!("unexpected `{}` at {}", &src[p.pos..], p.pos));
    }
    Ok(nodes)
}

struct XmlParser<'a> {
    src: &'a str,
    pos: usize,
}

impl XmlParser<'_> {
    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn nodes(&mut self) -> Result<Vec<Xml>, String> {
        let mut out = Vec::new();
        loop {
            if self.rest().is_empty() || self.rest().starts_with("</") {
                return Ok(out);
            }
            if self.rest().starts_with('<') {
                out.push(self.element()?);
            } else {
                let end = self.rest().find('<').unwrap_or(self.rest().len());
                let raw = &self.rest()[..end];
                if raw.contains('>') {
                    return Err(format!("raw `>` in text at {}", self.pos));
                }
                out.push(Xml::Text(decode_entities(raw)?));
                self.pos += end;
            }
        }
    }

    fn name(&mut self) -> Result<String, String> {
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-' || c == ':'))
            .unwrap_or(self.rest().len());
        if len == 0 {
            return Err(format!("expected a name at {}", self.pos));
        }
        let name = self.rest()[..len].to_string();
        self.pos += len;
        Ok(name)
    }

    fn element(&mut self) -> Result<Xml, String> {
        self.pos += 1;
        let name = self.name()?;
        let mut attrs = Vec::new();
        loop {
            self.pos = self.src.len() - self.rest().trim_start().len();
            if self.rest().starts_with("/>") {
                self.pos += 2;
                return Ok(Xml::Element {
                    name,
                    attrs,
                    children: vec![],
                });
            }
            if self.rest().starts_with('>') {
                self.pos += 1;
                break;
            }
            let key = self.name()?;
            if !self.rest().starts_with("=\"") {
                return Err(format!("unquoted attribute `{key}` at {}", self.pos));
            }
            self.pos += 2;
            let end = self.rest().find('"').ok_or("unterminated attribute")?;
            let value = decode_entities(&self.rest()[..end])?;
            if value.contains('<') {
                return Err("`<` in attribute".into());
            }
            self.pos += end + 1;
            attrs.push((key, value));
        }
        let children = self.nodes()?;
        let close = format!("</{name}>");
        if !self.rest().starts_with(&close) {
            return Err(format!("`<{name}>` not closed at {}", self.pos));
        }
        self.pos += close.len();
        Ok(Xml::Element {
            name,
            attrs,
            children,
        })
    }
}

fn decode_entities(raw: &str) -> Result<String, String> {
    let mut out = String::new();
    let mut rest = raw;
    while let Some(i) = rest.find('&') {
        out += &rest[..i];
        let end = rest[i..]
            .find(';')
            .ok_or_else(|| format!("bare `&` in `{raw}`"))?
            + i;
        let entity = &rest[i + 1..end];
        let c = match entity {
            "amp" => '&',
            "lt" => '<',
            "gt" => '>',
            "quot" => '"',
            "apos" => '\'',
            _ => {
                let code = entity
                    .strip_prefix("#x")
                    .map(|h| u32::from_str_radix(h, 16))
                    .or_else(|| entity.strip_prefix('#').map(|d| d.parse::<u32>()))
                    .ok_or_else(|| format!("unknown entity `&{entity};`"))?
                    .map_err(|e| e.to_string())?;
                char::from_u32(code).ok_or("bad code point")?
            }
        };
        out.push(c);
        rest = &rest[end + 1..];
    }
    out += rest;
    Ok(out)
}

/// Tags and attribute fragments that must never appear in emitted HTML.
pub const FORBIDDEN: &[&str] = &[
    "<script",
    "onerror=",
    "onclick=",
    "javascript:",
    "<img",
    "data:image",
    "base64",
];

pub fn forbidden_pattern(html: &str) -> Option<&'static str> {
    let lower = html.to_lowercase();
    FORBIDDEN.iter().copied().find(|p| lower.contains(p))
}

/// Checks tag balance and quoting, then the forbidden list.
pub fn check_html(html: &str) -> Result<(), String> {
    parse_xml(html)?;
    match forbidden_pattern(html) {
        Some(p) => Err(format!("forbidden `{p}` in output")),
        None => Ok(()),
    }
}

/// Presentation skeleton of MathML: attributes and whitespace text dropped,
/// every `mrow` with one child replaced by that child, and a `math` whose
/// only child is an `mrow` given that row's children. Two renderers that
/// agree on structure agree on this string.
pub fn math_skeleton(html: &str) -> Result<String, String> {
    let mut out = String::new();
    for node in parse_xml(html)? {
        print_skeleton(&mut out, &normalize(node));
    }
    Ok(out)
}

fn normalize(node: Xml) -> Xml {
    let Xml::Element { name, children, .. } = node else {
        return node;
    };
    let mut kids: Vec<Xml> = children
        .into_iter()
        .filter(|c| !matches!(c, Xml::Text(t) if t.trim().is_empty()))
        .map(normalize)
        .collect();
    if name == "mrow" && kids.len() == 1 {
        return kids.pop().unwrap();
    }
    if name == "math" && kids.len() == 1 {
        if let Xml::Element { name: inner, .. } = &kids[0] {
            if inner == "mrow" {
                let Some(Xml::Element { children, .. }) = kids.pop() else {
                    unreachable!()
                };
                kids = children;
            }
        }
    }
    Xml::Element {
        name,
        attrs: vec![],
        children: kids,
    }
}

fn print_skeleton(out: &mut String, node: &Xml) {
    match node {
        Xml::Text(t) => out.push_str(t.trim()),
        Xml::Element { name, children, .. } => {
            out.push_str(&format!("<{name}>"));
            for c in children {
                print_skeleton(out, c);
            }
            out.push_str(&format!("</{name}>"));
        }
    }
}
