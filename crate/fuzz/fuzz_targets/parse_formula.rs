#![no_main]

use cbt_core::markup::{parse_formula, render_math_node};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|source: &str| {
    match parse_formula(source) {
        Ok(tree) => {
            let html = render_math_node(&tree, false);
            assert!(html.starts_with("<math"));
        }
        Err(e) => assert!(e.pos.offset <= source.len()),
    }
});
