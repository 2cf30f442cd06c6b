//! Exams, questions, attempts and grading over compiled markup.
//!
//! Everything here is plain data plus pure functions; persistence and
//! access control live in the store and the service.

mod attempt;
mod exam;
mod ids;
mod redact;

pub use attempt::{grade_attempt, Attempt, AttemptState, QuestionScore, Score};
pub use exam::{
    compile_question, compile_question_with, validate_question, Choice, Exam, ExamState, Question,
    QuestionDraft, ValidationError,
};
pub use ids::{AttemptId, BadLabel, ExamId, Label, QuestionId, UserId};
pub use redact::{student_view, ExamSummary, StudentChoice, StudentExam, StudentQuestion};

use crate::markup::MarkupError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContentError {
    #[error("invalid exam: {0}")]
    InvalidExam(String),
    #[error("question failed validation: {}", join(.0))]
    Invalid(Vec<ValidationError>),
    #[error(transparent)]
    Markup(#[from] MarkupError),
    #[error("cannot change exam state from {from} to {to}")]
    IllegalTransition { from: ExamState, to: ExamState },
    #[error("an exam needs at least one question before it can start")]
    NoQuestions,
    #[error("questions can only be added while the exam is a draft (it is {0})")]
    NotDraft(ExamState),
    #[error("exam is not available to students (it is {0})")]
    NotAvailable(ExamState),
    #[error("attempt belongs to a different exam")]
    ExamMismatch,
    #[error("attempt has not been submitted")]
    AttemptNotSubmitted,
    #[error("attempt is already submitted")]
    AttemptClosed,
    #[error("the attempt deadline has passed")]
    DeadlinePassed,
    #[error("question {0} is not part of this exam")]
    UnknownQuestion(QuestionId),
    #[error("question {question} has no option {label}")]
    UnknownLabel { question: QuestionId, label: Label },
}

fn join(errors: &[ValidationError]) -> String {
    errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
