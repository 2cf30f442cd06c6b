#![no_main]

use cbt_core::markup::{tokenize, LexMode};
use libfuzzer_sys::fuzz_target;

// First byte picks the lexer mode; tokens must tile the input exactly.
fuzz_target!(|data: &[u8]| {
    let Some((&mode, rest)) = data.split_first() else {
        return;
    };
    let Ok(source) = std::str::from_utf8(rest) else {
        return;
    };
    let mode = if mode & 1 == 0 {
        LexMode::Math
    } else {
        LexMode::Table
    };
    if let Ok(tokens) = tokenize(source, mode) {
        let mut offset = 0;
        for t in &tokens {
            assert_eq!(t.span.start.offset, offset);
            offset = t.span.end.offset;
        }
        assert_eq!(offset, source.len());
    }
});
