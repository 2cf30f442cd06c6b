//! Core of a computer-based testing server whose questions are written in a
//! LaTeX subset and delivered as MathML/HTML text.
//!
//! * [`markup`] compiles question markup.
//! * [`content`] holds exams, questions, attempts and grading.
//! * [`store`] persists everything in an embedded transactional log.
//! * [`exam_file`] is the portable JSON exchange format.

pub mod content;
pub mod exam_file;
pub mod hash;
pub mod markup;
pub mod store;

pub use hash::{content_hash, SourceHash};
