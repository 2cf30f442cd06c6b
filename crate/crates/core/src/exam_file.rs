//! Portable JSON interchange format for exams.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "exam": {
//!     "title": "Engineering Mathematics III",
//!     "course_code": "FEG 303",
//!     "duration_minutes": 60,
//!     "questions": [
//!       {
//!         "stem_source": "Evaluate $\\sum_{k=1}^{2} k$.",
//!         "options": [{ "source": "$3$" }, { "source": "$2$" }],
//!         "correct_index": 0,
//!         "points": 1
//!       }
//!     ]
//!   }
//! }
//! ```
//!
//! The correct answer is a 0-based option index; labels are assigned by the
//! server. Ids and exam state are not part of the file.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::content::{validate_question, Exam, Label, QuestionDraft, ValidationError};

pub const EXAM_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExamFile {
    pub format_version: u32,
    pub exam: ExamSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExamSpec {
    pub title: String,
    #[serde(default)]
    pub course_code: String,
    pub duration_minutes: i64,
    pub questions: Vec<QuestionSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionSpec {
    pub stem_source: String,
    pub options: Vec<OptionSpec>,
    pub correct_index: i64,
    #[serde(default = "one")]
    pub points: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionSpec {
    pub source: String,
}

fn one() -> i64 {
    1
}

/// A reason an exam file cannot be imported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExamFileProblem {
    Syntax(String),
    UnsupportedVersion(u32),
    EmptyTitle,
    BadDuration(i64),
    CorrectIndexOutOfRange {
        question: usize,
        index: i64,
        options: usize,
    },
    Question {
        question: usize,
        error: ValidationError,
    },
}

impl fmt::Display for ExamFileProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExamFileProblem::Syntax(msg) => write!(f, "not a valid exam file: {msg}"),
            ExamFileProblem::UnsupportedVersion(v) => write!(
                f,
                "format_version {v} is not supported (expected {EXAM_FILE_VERSION})"
            ),
            ExamFileProblem::EmptyTitle => f.write_str("exam title must not be empty"),
            ExamFileProblem::BadDuration(d) => {
                write!(f, "duration_minutes must be a positive integer (got {d})")
            }
            ExamFileProblem::CorrectIndexOutOfRange {
                question,
                index,
                options,
            } => write!(
                f,
                "question {}: correct_index {index} is out of range for {options} options",
                question + 1
            ),
            ExamFileProblem::Question { question, error } => {
                write!(f, "question {}: {error}", question + 1)
            }
        }
    }
}

impl ExamFile {
    /// Parses without validating; see [`ExamFile::validate`].
    pub fn from_json(text: &str) -> Result<ExamFile, ExamFileProblem> {
        serde_json::from_str(text).map_err(|e| ExamFileProblem::Syntax(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data always serializes")
    }

    /// Parses and validates in one step.
    pub fn load(text: &str) -> Result<ExamFile, Vec<ExamFileProblem>> {
        let file = ExamFile::from_json(text).map_err(|p| vec![p])?;
        file.validate()?;
        Ok(file)
    }

    /// Checks everything the server would check, so an import can fail
    /// before any request is made. Reports every problem found.
    pub fn validate(&self) -> Result<(), Vec<ExamFileProblem>> {
        let mut problems = Vec::new();
        if self.format_version != EXAM_FILE_VERSION {
            problems.push(ExamFileProblem::UnsupportedVersion(self.format_version));
        }
        if self.exam.title.trim().is_empty() {
            problems.push(ExamFileProblem::EmptyTitle);
        }
        if self.exam.duration_minutes < 1 || self.exam.duration_minutes > i64::from(u32::MAX) {
            problems.push(ExamFileProblem::BadDuration(self.exam.duration_minutes));
        }
        for (question, q) in self.exam.questions.iter().enumerate() {
            let in_range = usize::try_from(q.correct_index).is_ok_and(|i| i < q.options.len());
            if !in_range {
                problems.push(ExamFileProblem::CorrectIndexOutOfRange {
                    question,
                    index: q.correct_index,
                    options: q.options.len(),
                });
            }
            if let Err(errors) = validate_question(&q.to_draft()) {
                problems.extend(
                    errors
                        .into_iter()
                        // Already reported above in file terms.
                        .filter(|e| {
                            in_range || !matches!(e, ValidationError::UnknownCorrectLabel { .. })
                        })
                        .map(|error| ExamFileProblem::Question { question, error }),
                );
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }

    /// The file form of `exam`: sources only, ids and state dropped.
    pub fn from_exam(exam: &Exam) -> ExamFile {
        ExamFile {
            format_version: EXAM_FILE_VERSION,
            exam: ExamSpec {
                title: exam.title.clone(),
                course_code: exam.course_code.clone(),
                duration_minutes: i64::from(exam.duration_minutes),
                questions: exam
                    .questions
                    .iter()
                    .map(|q| QuestionSpec {
                        stem_source: q.stem_source.clone(),
                        options: q
                            .options
                            .iter()
                            .map(|c| OptionSpec {
                                source: c.source.clone(),
                            })
                            .collect(),
                        correct_index: q.correct_label.index() as i64,
                        points: i64::from(q.points),
                    })
                    .collect(),
            },
        }
    }
}

impl QuestionSpec {
    /// The draft the server accepts for this question. An out-of-range
    /// index becomes a label the draft validation rejects.
    pub fn to_draft(&self) -> QuestionDraft {
        let correct_label = usize::try_from(self.correct_index)
            .ok()
            .and_then(Label::from_index)
            .map(|l| l.to_string())
            .unwrap_or_else(|| self.correct_index.to_string());
        QuestionDraft {
            stem_source: self.stem_source.clone(),
            options: self.options.iter().map(|o| o.source.clone()).collect(),
            correct_label,
            points: self.points,
        }
    }
}
