#![no_main]

use cbt_core::markup::{render_document, segment_bytes};
use libfuzzer_sys::fuzz_target;

// Segments must tile the source, and rendering a valid document is total.
fuzz_target!(|data: &[u8]| {
    if let Ok(doc) = segment_bytes(data) {
        let rebuilt: String = doc
            .segments
            .iter()
            .map(|s| s.span.slice(&doc.source))
            .collect();
        assert_eq!(rebuilt, doc.source);
        let fragment = render_document(&doc);
        assert!(!fragment.html.contains("<script"));
    }
});
