use std::collections::BTreeMap;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use super::exam::{Exam, ExamState};
use super::ids::{AttemptId, ExamId, Label, QuestionId, UserId};
use super::ContentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttemptState {
    InProgress,
    Submitted,
}

/// One student's sitting of one exam.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    pub id: AttemptId,
    pub exam_id: ExamId,
    pub student_id: UserId,
    pub answers: BTreeMap<QuestionId, Label>,
    pub state: AttemptState,
    pub started_at: DateTime<Utc>,
    /// `started_at` plus the exam duration; answers are refused from here on.
    pub deadline: DateTime<Utc>,
    pub submitted_at: Option<DateTime<Utc>>,
    /// Filled in on submit.
    pub score: Option<Score>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Score {
    pub points_earned: u32,
    pub points_total: u32,
    pub per_question: BTreeMap<QuestionId, QuestionScore>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionScore {
    pub chosen: Option<Label>,
    pub correct: Label,
    pub earned: u32,
}

impl Attempt {
    pub fn begin(
        exam: &Exam,
        student_id: UserId,
        now: DateTime<Utc>,
    ) -> Result<Attempt, ContentError> {
        if exam.state != ExamState::Started {
            return Err(ContentError::NotAvailable(exam.state));
        }
        Ok(Attempt {
            id: AttemptId::generate(),
            exam_id: exam.id.clone(),
            student_id,
            answers: BTreeMap::new(),
            state: AttemptState::InProgress,
            started_at: now,
            deadline: now + Duration::minutes(i64::from(exam.duration_minutes)),
            submitted_at: None,
            score: None,
        })
    }

    pub fn is_open_at(&self, now: DateTime<Utc>) -> bool {
        self.state == AttemptState::InProgress && now < self.deadline
    }

    /// Stores (or overwrites) the answer to one question.
    pub fn record_answer(
        &mut self,
        exam: &Exam,
        question_id: &QuestionId,
        label: Label,
        now: DateTime<Utc>,
    ) -> Result<(), ContentError> {
        if exam.id != self.exam_id {
            return Err(ContentError::ExamMismatch);
        }
        if self.state == AttemptState::Submitted {
            return Err(ContentError::AttemptClosed);
        }
        if now >= self.deadline {
            return Err(ContentError::DeadlinePassed);
        }
        let question = exam
            .question(question_id)
            .ok_or_else(|| ContentError::UnknownQuestion(question_id.clone()))?;
        if question.choice(label).is_none() {
            return Err(ContentError::UnknownLabel {
                question: question_id.clone(),
                label,
            });
        }
        self.answers.insert(question_id.clone(), label);
        Ok(())
    }

    /// Closes the attempt and grades it. Late submission is accepted; only
    /// answering is cut off at the deadline.
    pub fn submit(&mut self, exam: &Exam, now: DateTime<Utc>) -> Result<Score, ContentError> {
        if exam.id != self.exam_id {
            return Err(ContentError::ExamMismatch);
        }
        if self.state == AttemptState::Submitted {
            return Err(ContentError::AttemptClosed);
        }
        self.state = AttemptState::Submitted;
        self.submitted_at = Some(now.max(self.started_at));
        let score = grade_attempt(self, exam)?;
        self.score = Some(score.clone());
        Ok(score)
    }
}

/// All-or-nothing per question, no negative marking; unanswered earns 0.
pub fn grade_attempt(attempt: &Attempt, exam: &Exam) -> Result<Score, ContentError> {
    if attempt.exam_id != exam.id {
        return Err(ContentError::ExamMismatch);
    }
    if attempt.state != AttemptState::Submitted {
        return Err(ContentError::AttemptNotSubmitted);
    }
    let per_question: BTreeMap<QuestionId, QuestionScore> = exam
        .questions
        .iter()
        .map(|q| {
            let chosen = attempt.answers.get(&q.id).copied();
            let earned = if chosen == Some(q.correct_label) {
                q.points
            } else {
                0
            };
            (
                q.id.clone(),
                QuestionScore {
                    chosen,
                    correct: q.correct_label,
                    earned,
                },
            )
        })
        .collect();
    Ok(Score {
        points_earned: per_question.values().map(|s| s.earned).sum(),
        points_total: exam.points_total(),
        per_question,
    })
}
