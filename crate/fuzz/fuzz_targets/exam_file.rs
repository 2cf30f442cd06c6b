#![no_main]

use cbt_core::exam_file::ExamFile;
use libfuzzer_sys::fuzz_target;

// Anything that loads must survive a write/read cycle unchanged.
fuzz_target!(|text: &str| {
    if let Ok(file) = ExamFile::load(text) {
        let again = ExamFile::from_json(&file.to_json_pretty()).expect("own output parses");
        assert_eq!(again, file);
    }
});
