use std::fmt;

use serde::{Deserialize, Serialize};

use super::ids::{ExamId, Label, QuestionId};
use super::ContentError;
use crate::markup::{compile, MarkupError, RenderedFragment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExamState {
    Draft,
    Started,
    Stopped,
}

impl fmt::Display for ExamState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExamState::Draft => "draft",
            ExamState::Started => "started",
            ExamState::Stopped => "stopped",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exam {
    pub id: ExamId,
    pub title: String,
    pub course_code: String,
    pub duration_minutes: u32,
    pub state: ExamState,
    pub questions: Vec<Question>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: QuestionId,
    pub stem_source: String,
    pub stem_fragment: RenderedFragment,
    pub options: Vec<Choice>,
    pub correct_label: Label,
    pub points: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Choice {
    pub label: Label,
    pub source: String,
    pub fragment: RenderedFragment,
}

/// Author input for one question, before validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionDraft {
    pub stem_source: String,
    pub options: Vec<String>,
    pub correct_label: String,
    #[serde(default = "default_points")]
    pub points: i64,
}

fn default_points() -> i64 {
    1
}

/// One reason a [`QuestionDraft`] cannot be compiled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ValidationError {
    #[error("stem: {error}")]
    StemMarkup { error: MarkupError },
    #[error("option {index}: {error}")]
    OptionMarkup { index: usize, error: MarkupError },
    #[error("fewer than 2 options ({count} given)")]
    TooFewOptions { count: usize },
    #[error("more than {max} options ({count} given)")]
    TooManyOptions { count: usize, max: usize },
    #[error("correct label `{label}` does not name an option")]
    UnknownCorrectLabel { label: String },
    #[error("points must be at least 1 (got {points})")]
    NonPositivePoints { points: i64 },
}

impl Exam {
    /// A new, empty exam in `Draft`.
    pub fn new(
        title: impl Into<String>,
        course_code: impl Into<String>,
        duration_minutes: i64,
    ) -> Result<Exam, ContentError> {
        let title = title.into();
        if title.trim().is_empty() {
            return Err(ContentError::InvalidExam("title must not be empty".into()));
        }
        let duration_minutes = u32::try_from(duration_minutes)
            .ok()
            .filter(|d| *d > 0)
            .ok_or_else(|| {
                ContentError::InvalidExam(format!(
                    "duration_minutes must be a positive integer (got {duration_minutes})"
                ))
            })?;
        Ok(Exam {
            id: ExamId::generate(),
            title,
            course_code: course_code.into(),
            duration_minutes,
            state: ExamState::Draft,
            questions: Vec::new(),
        })
    }

    pub fn question(&self, id: &QuestionId) -> Option<&Question> {
        self.questions.iter().find(|q| &q.id == id)
    }

    pub fn points_total(&self) -> u32 {
        self.questions.iter().map(|q| q.points).sum()
    }

    pub fn add_question(&mut self, question: Question) -> Result<(), ContentError> {
        if self.state != ExamState::Draft {
            return Err(ContentError::NotDraft(self.state));
        }
        self.questions.push(question);
        Ok(())
    }

    /// Moves along `Draft -> Started -> Stopped`; nothing else is legal.
    pub fn transition(&mut self, to: ExamState) -> Result<(), ContentError> {
        match (self.state, to) {
            (ExamState::Draft, ExamState::Started) if self.questions.is_empty() => {
                Err(ContentError::NoQuestions)
            }
            (ExamState::Draft, ExamState::Started) | (ExamState::Started, ExamState::Stopped) => {
                self.state = to;
                Ok(())
            }
            (from, to) => Err(ContentError::IllegalTransition { from, to }),
        }
    }
}

impl Question {
    pub fn choice(&self, label: Label) -> Option<&Choice> {
        self.options.iter().find(|c| c.label == label)
    }
}

/// Checks every rule and reports all failures, not just the first.
pub fn validate_question(draft: &QuestionDraft) -> Result<(), Vec<ValidationError>> {
    let mut errors = Vec::new();
    if let Err(error) = compile(&draft.stem_source) {
        errors.push(ValidationError::StemMarkup { error });
    }
    for (index, option) in draft.options.iter().enumerate() {
        if let Err(error) = compile(option) {
            errors.push(ValidationError::OptionMarkup { index, error });
        }
    }
    let count = draft.options.len();
    if count < 2 {
        errors.push(ValidationError::TooFewOptions { count });
    }
    if count > Label::MAX_OPTIONS {
        errors.push(ValidationError::TooManyOptions {
            count,
            max: Label::MAX_OPTIONS,
        });
    }
    let label_ok = draft
        .correct_label
        .parse::<Label>()
        .is_ok_and(|l| l.index() < count);
    if !label_ok {
        errors.push(ValidationError::UnknownCorrectLabel {
            label: draft.correct_label.clone(),
        });
    }
    if draft.points < 1 || draft.points > i64::from(u32::MAX) {
        errors.push(ValidationError::NonPositivePoints {
            points: draft.points,
        });
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

/// Validates and renders a draft into a question with a fresh id.
pub fn compile_question(draft: &QuestionDraft) -> Result<Question, ContentError> {
    compile_question_with(draft, compile)
}

/// [`compile_question`] with a caller-supplied renderer, e.g. one backed by
/// a fragment cache. `render` must agree with [`compile`].
pub fn compile_question_with(
    draft: &QuestionDraft,
    mut render: impl FnMut(&str) -> Result<RenderedFragment, MarkupError>,
) -> Result<Question, ContentError> {
    validate_question(draft).map_err(ContentError::Invalid)?;
    let stem_fragment = render(&draft.stem_source)?;
    let options = draft
        .options
        .iter()
        .enumerate()
        .map(|(i, source)| {
            Ok(Choice {
                label: Label::from_index(i).expect("validated option count"),
                source: source.clone(),
                fragment: render(source)?,
            })
        })
        .collect::<Result<Vec<_>, MarkupError>>()?;
    Ok(Question {
        id: QuestionId::generate(),
        stem_source: draft.stem_source.clone(),
        stem_fragment,
        options,
        correct_label: draft.correct_label.parse().expect("validated label"),
        points: u32::try_from(draft.points).expect("validated points"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content_hash;
    use crate::markup::MarkupErrorKind;

    fn draft(stem: &str, options: &[&str], correct: &str, points: i64) -> QuestionDraft {
        QuestionDraft {
            stem_source: stem.into(),
            options: options.iter().map(|s| s.to_string()).collect(),
            correct_label: correct.into(),
            points,
        }
    }

    #[test]
    fn valid_question() {
        assert_eq!(
            validate_question(&draft("What is $1+1$?", &["$2$", "$3$"], "A", 1)),
            Ok(())
        );
    }

    #[test]
    fn too_few_options() {
        let errs = validate_question(&draft("Q", &["$2$"], "A", 1)).unwrap_err();
        assert_eq!(errs, vec![ValidationError::TooFewOptions { count: 1 }]);
        assert!(errs[0].to_string().contains("fewer than 2 options"));
    }

    #[test]
    fn markup_error_position_is_reported() {
        let errs = validate_question(&draft("bad ${math", &["a", "b"], "A", 1)).unwrap_err();
        let [ValidationError::StemMarkup { error }] = errs.as_slice() else {
            panic!("{errs:?}");
        };
        assert_eq!(error.kind, MarkupErrorKind::UnbalancedBrace);
        assert_eq!(
            (error.pos.offset, error.pos.line, error.pos.column),
            (5, 1, 6)
        );
    }

    #[test]
    fn all_errors_are_collected() {
        let errs = validate_question(&draft("$x^2^3$", &["$", "ok"], "E", 0)).unwrap_err();
        assert_eq!(errs.len(), 4, "{errs:?}");
        assert!(matches!(
            errs[1],
            ValidationError::OptionMarkup { index: 0, .. }
        ));
        assert!(matches!(
            errs[2],
            ValidationError::UnknownCorrectLabel { .. }
        ));
        assert!(matches!(
            errs[3],
            ValidationError::NonPositivePoints { points: 0 }
        ));
        let errs = validate_question(&draft("q", &["a", "b", "c", "d"], "E", 1)).unwrap_err();
        assert_eq!(errs.len(), 1);
    }

    #[test]
    fn compile_assigns_labels_and_coherent_hashes() {
        let q = compile_question(&draft("Pick", &["$x^2$", "$y$"], "B", 2)).unwrap();
        let labels: Vec<String> = q.options.iter().map(|c| c.label.to_string()).collect();
        assert_eq!(labels, ["A", "B"]);
        assert_eq!(q.correct_label.to_string(), "B");
        assert_eq!(q.points, 2);
        assert_eq!(q.stem_fragment.source_hash, content_hash("Pick"));
        for c in &q.options {
            assert_eq!(c.fragment.source_hash, content_hash(&c.source));
        }
        assert!(q.options[0]
            .fragment
            .html
            .contains("<msup><mi>x</mi><mn>2</mn></msup>"));
    }

    #[test]
    fn compile_rejects_invalid_drafts() {
        assert!(matches!(
            compile_question(&draft("Q", &["a"], "A", 1)),
            Err(ContentError::Invalid(_))
        ));
    }

    #[test]
    fn exam_construction_and_state_machine() {
        assert!(Exam::new("", "X", 10).is_err());
        assert!(Exam::new("T", "X", 0).is_err());
        assert!(Exam::new("T", "X", -5).is_err());
        let mut exam = Exam::new("Engineering Mathematics III", "FEG 303", 60).unwrap();
        assert_eq!(exam.state, ExamState::Draft);
        assert_eq!(
            exam.transition(ExamState::Started),
            Err(ContentError::NoQuestions)
        );
        assert!(matches!(
            exam.transition(ExamState::Stopped),
            Err(ContentError::IllegalTransition { .. })
        ));
        exam.add_question(compile_question(&draft("Q", &["a", "b"], "A", 1)).unwrap())
            .unwrap();
        exam.transition(ExamState::Started).unwrap();
        assert!(matches!(
            exam.add_question(compile_question(&draft("Q", &["a", "b"], "A", 1)).unwrap()),
            Err(ContentError::NotDraft(ExamState::Started))
        ));
        exam.transition(ExamState::Stopped).unwrap();
        for to in [ExamState::Draft, ExamState::Started, ExamState::Stopped] {
            assert!(exam.transition(to).is_err());
        }
    }
}
