#![no_main]

use cbt_core::content::{compile_question, validate_question, QuestionDraft};
use libfuzzer_sys::fuzz_target;

// Request bodies for the add-question endpoint: validation and
// compilation must agree on what is acceptable.
fuzz_target!(|data: &[u8]| {
    let Ok(draft) = serde_json::from_slice::<QuestionDraft>(data) else {
        return;
    };
    assert_eq!(
        validate_question(&draft).is_ok(),
        compile_question(&draft).is_ok()
    );
});
