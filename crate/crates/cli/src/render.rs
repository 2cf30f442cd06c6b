use std::io::Write;
use std::path::PathBuf;

use cbt_core::markup::{parse_formula, render_document, render_math_node, segment_document};
use clap::Args;

#[derive(Args)]
pub struct RenderArgs {
    /// Markup file to render.
    file: PathBuf,
    /// Treat the whole file as one formula and typeset it as a display block.
    #[arg(long, env = "CBT_DISPLAY")]
    display: bool,
}

/// Writes exactly the library's output, with no trailing newline added.
pub fn run(args: RenderArgs) -> Result<(), String> {
    let source = std::fs::read_to_string(&args.file)
        .map_err(|e| format!("error: cannot read {}: {e}", args.file.display()))?;
    let html = if args.display {
        parse_formula(&source).map(|node| render_math_node(&node, true))
    } else {
        segment_document(&source).map(|doc| render_document(&doc).html)
    }
    .map_err(|e| format!("{}:{}: {}", args.file.display(), e.pos, e.message))?;
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(html.as_bytes())
        .and_then(|()| stdout.flush())
        .map_err(|e| format!("error: cannot write output: {e}"))
}
