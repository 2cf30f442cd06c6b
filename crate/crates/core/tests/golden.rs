mod common;

use std::collections::BTreeMap;

use cbt_core::markup::{
    compile, parse_formula, render_math_node, segment_document, MathNode, NodeKind, SegmentKind,
};
use common::math_skeleton;

const TABLE1: &str = r"\sum_{k=1}^{2} a*b^2";
const GOLDEN_INLINE: &str = include_str!("golden/table1_inline.html");
const GOLDEN_DISPLAY: &str = include_str!("golden/table1_display.html");

/// Compact rendering of a tree, written independently of the renderer.
fn shape(node: &MathNode) -> String {
    let opt = |n: &Option<Box<MathNode>>| n.as_deref().map_or("-".to_string(), shape);
    match &node.kind {
        NodeKind::Row(kids) => format!(
            "Row[{}]",
            kids.iter().map(shape).collect::<Vec<_>>().join(", ")
        ),
        NodeKind::Ident(c) => format!("Ident {c}"),
        NodeKind::Num(n) => format!("Num {n}"),
        NodeKind::Op(c) => format!("Op {c}"),
        NodeKind::Frac {
            numerator,
            denominator,
        } => {
            format!("Frac({}, {})", shape(numerator), shape(denominator))
        }
        NodeKind::Root { degree, radicand } => {
            format!("Root({}, {})", opt(degree), shape(radicand))
        }
        NodeKind::Script { base, sub, sup } => {
            format!("Script({}, {}, {})", shape(base), opt(sub), opt(sup))
        }
        NodeKind::Symbol { name, .. } => format!("Symbol {name}"),
        NodeKind::BigOp {
            name, lower, upper, ..
        } => format!("BigOp({name}, {}, {})", opt(lower), opt(upper)),
        NodeKind::Delimited { left, body, right } => {
            format!("Delimited({left} {} {right})", shape(body))
        }
        NodeKind::Table { rows, .. } => format!("Table[{}]", rows.len()),
    }
}

#[test]
fn table1_tree_matches_hand_derivation() {
    let tree = parse_formula(TABLE1).unwrap();
    assert_eq!(
        shape(&tree),
        "Row[BigOp(sum, Row[Ident k, Op =, Num 1], Num 2), Ident a, Op *, Script(Ident b, -, Num 2)]"
    );
}

#[test]
fn table1_golden_inline() {
    let html = compile(&format!("${TABLE1}$")).unwrap().html;
    assert_eq!(html, GOLDEN_INLINE);
}

#[test]
fn table1_golden_display() {
    let html = compile(&format!("\\begin{{equation}}{TABLE1}\\end{{equation}}"))
        .unwrap()
        .html;
    assert_eq!(html, GOLDEN_DISPLAY);
}

#[test]
fn golden_is_the_node_renderer_output() {
    let tree = parse_formula(TABLE1).unwrap();
    assert_eq!(
        format!("<p>{}</p>", render_math_node(&tree, false)),
        GOLDEN_INLINE
    );
    assert_eq!(render_math_node(&tree, true), GOLDEN_DISPLAY);
}

/// MathML produced by an independent LaTeX-to-MathML converter for the same
/// sources; structure must agree once presentational wrappers are ignored.
#[test]
fn structure_agrees_with_reference_renderer() {
    let fixtures: BTreeMap<String, BTreeMap<String, String>> =
        serde_json::from_str(include_str!("fixtures/reference_mathml.json")).unwrap();
    assert!(fixtures.len() >= 6);
    for (name, case) in &fixtures {
        let ours = render_math_node(&parse_formula(&case["latex"]).unwrap(), false);
        assert_eq!(
            math_skeleton(&ours).unwrap(),
            math_skeleton(&case["mathml"]).unwrap(),
            "{name}: {}",
            case["latex"]
        );
    }
}

#[test]
fn worked_examples() {
    let frac = parse_formula(r"\frac{1}{2}").unwrap();
    assert_eq!(shape(&frac), "Frac(Num 1, Num 2)");
    assert_eq!(
        render_math_node(&frac, true),
        r#"<math display="block"><mfrac><mn>1</mn><mn>2</mn></mfrac></math>"#
    );
    assert_eq!(
        render_math_node(&parse_formula("x").unwrap(), false),
        r#"<math display="inline"><mi>x</mi></math>"#
    );

    let doc = segment_document("Evaluate $x^2$ now.").unwrap();
    let kinds: Vec<String> = doc
        .segments
        .iter()
        .map(|s| match &s.kind {
            SegmentKind::Text(t) => format!("Text {t:?}"),
            SegmentKind::InlineMath(n) => format!("Inline {}", shape(n)),
            other => format!("{other:?}"),
        })
        .collect();
    assert_eq!(
        kinds,
        [
            r#"Text "Evaluate ""#,
            "Inline Script(Ident x, -, Num 2)",
            r#"Text " now.""#
        ]
    );

    let doc = segment_document(r"cost is \$5").unwrap();
    assert_eq!(doc.segments.len(), 1);
    assert_eq!(doc.segments[0].kind, SegmentKind::Text("cost is $5".into()));
    assert_eq!(doc.segments[0].span.slice(&doc.source), r"cost is \$5");

    assert_eq!(compile("plain").unwrap().html, "<p>plain</p>");
    assert!(compile("a < b").unwrap().html.contains("a &lt; b"));
    assert_eq!(
        compile(r"\begin{verbatim}if x<1: y=2\end{verbatim}")
            .unwrap()
            .html,
        "<pre><code>if x&lt;1: y=2</code></pre>"
    );
}
