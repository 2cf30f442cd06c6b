use serde::{Deserialize, Serialize};

use super::exam::{Exam, ExamState};
use super::ids::{ExamId, Label, QuestionId};
use super::ContentError;

/// Dashboard card for an exam a student may sit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExamSummary {
    pub exam_id: ExamId,
    pub title: String,
    pub course_code: String,
    pub duration_minutes: u32,
}

/// An exam as delivered to a student: rendered HTML only, no sources and no
/// answer key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudentExam {
    pub exam_id: ExamId,
    pub title: String,
    pub course_code: String,
    pub duration_minutes: u32,
    pub questions: Vec<StudentQuestion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudentQuestion {
    pub question_id: QuestionId,
    pub stem_html: String,
    pub points: u32,
    pub options: Vec<StudentChoice>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudentChoice {
    pub label: Label,
    pub html: String,
}

impl ExamSummary {
    pub fn of(exam: &Exam) -> ExamSummary {
        ExamSummary {
            exam_id: exam.id.clone(),
            title: exam.title.clone(),
            course_code: exam.course_code.clone(),
            duration_minutes: exam.duration_minutes,
        }
    }
}

/// Redacts a started exam for delivery, preserving question order.
pub fn student_view(exam: &Exam) -> Result<StudentExam, ContentError> {
    if exam.state != ExamState::Started {
        return Err(ContentError::NotAvailable(exam.state));
    }
    Ok(StudentExam {
        exam_id: exam.id.clone(),
        title: exam.title.clone(),
        course_code: exam.course_code.clone(),
        duration_minutes: exam.duration_minutes,
        questions: exam
            .questions
            .iter()
            .map(|q| StudentQuestion {
                question_id: q.id.clone(),
                stem_html: q.stem_fragment.html.clone(),
                points: q.points,
                options: q
                    .options
                    .iter()
                    .map(|c| StudentChoice {
                        label: c.label,
                        html: c.fragment.html.clone(),
                    })
                    .collect(),
            })
            .collect(),
    })
}
