use std::fmt;

use cbt_core::content::ContentError;
use cbt_core::store::StoreError;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Machine-readable error codes. The set is closed: clients may match on
/// every value and none will be renamed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    BadRequest,
    Unauthorized,
    Forbidden,
    ExamNotStarted,
    NotFound,
    AlreadyAttempted,
    IllegalTransition,
    NoQuestions,
    ExamNotDraft,
    AttemptSubmitted,
    DeadlinePassed,
    UsernameTaken,
    ValidationFailed,
    InvalidExam,
    InvalidUser,
    UnknownQuestion,
    UnknownLabel,
    Internal,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 18] = [
        ErrorCode::BadRequest,
        ErrorCode::Unauthorized,
        ErrorCode::Forbidden,
        ErrorCode::ExamNotStarted,
        ErrorCode::NotFound,
        ErrorCode::AlreadyAttempted,
        ErrorCode::IllegalTransition,
        ErrorCode::NoQuestions,
        ErrorCode::ExamNotDraft,
        ErrorCode::AttemptSubmitted,
        ErrorCode::DeadlinePassed,
        ErrorCode::UsernameTaken,
        ErrorCode::ValidationFailed,
        ErrorCode::InvalidExam,
        ErrorCode::InvalidUser,
        ErrorCode::UnknownQuestion,
        ErrorCode::UnknownLabel,
        ErrorCode::Internal,
    ];

    pub fn status(self) -> u16 {
        use ErrorCode::*;
        match self {
            BadRequest => 400,
            Unauthorized => 401,
            Forbidden | ExamNotStarted => 403,
            NotFound => 404,
            AlreadyAttempted | IllegalTransition | NoQuestions | ExamNotDraft
            | AttemptSubmitted | DeadlinePassed | UsernameTaken => 409,
            ValidationFailed | InvalidExam | InvalidUser | UnknownQuestion | UnknownLabel => 422,
            Internal => 500,
        }
    }

    pub fn as_str(self) -> &'static str {
        use ErrorCode::*;
        match self {
            BadRequest => "bad_request",
            Unauthorized => "unauthorized",
            Forbidden => "forbidden",
            ExamNotStarted => "exam_not_started",
            NotFound => "not_found",
            AlreadyAttempted => "already_attempted",
            IllegalTransition => "illegal_transition",
            NoQuestions => "no_questions",
            ExamNotDraft => "exam_not_draft",
            AttemptSubmitted => "attempt_submitted",
            DeadlinePassed => "deadline_passed",
            UsernameTaken => "username_taken",
            ValidationFailed => "validation_failed",
            InvalidExam => "invalid_exam",
            InvalidUser => "invalid_user",
            UnknownQuestion => "unknown_question",
            UnknownLabel => "unknown_label",
            Internal => "internal",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Error body of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("{status} {code}: {message}")]
pub struct ApiError {
    pub status: u16,
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> ApiError {
        ApiError {
            status: code.status(),
            code,
            message: message.into(),
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Serialize) -> ApiError {
        self.detail = serde_json::to_value(detail).ok();
        self
    }

    pub fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError::new(ErrorCode::BadRequest, message)
    }

    pub fn unauthorized() -> ApiError {
        ApiError::new(
            ErrorCode::Unauthorized,
            "missing, invalid or expired session token",
        )
    }

    pub fn bad_credentials() -> ApiError {
        ApiError::new(ErrorCode::Unauthorized, "invalid username or password")
    }

    pub fn forbidden(message: impl Into<String>) -> ApiError {
        ApiError::new(ErrorCode::Forbidden, message)
    }

    pub fn not_found(what: &str, id: &str) -> ApiError {
        ApiError::new(ErrorCode::NotFound, format!("{what} `{id}` does not exist"))
    }

    pub fn internal() -> ApiError {
        ApiError::new(ErrorCode::Internal, "internal server error")
    }
}

impl From<ContentError> for ApiError {
    fn from(e: ContentError) -> ApiError {
        let code = match &e {
            ContentError::InvalidExam(_) => ErrorCode::InvalidExam,
            ContentError::Invalid(errors) => {
                return ApiError::new(ErrorCode::ValidationFailed, e.to_string())
                    .with_detail(errors)
            }
            ContentError::Markup(error) => {
                return ApiError::new(ErrorCode::ValidationFailed, e.to_string())
                    .with_detail([error])
            }
            ContentError::IllegalTransition { .. } => ErrorCode::IllegalTransition,
            ContentError::NoQuestions => ErrorCode::NoQuestions,
            ContentError::NotDraft(_) => ErrorCode::ExamNotDraft,
            ContentError::NotAvailable(_) => ErrorCode::ExamNotStarted,
            ContentError::AttemptClosed => ErrorCode::AttemptSubmitted,
            ContentError::DeadlinePassed => ErrorCode::DeadlinePassed,
            ContentError::UnknownQuestion(_) => ErrorCode::UnknownQuestion,
            ContentError::UnknownLabel { .. } => ErrorCode::UnknownLabel,
            ContentError::ExamMismatch | ContentError::AttemptNotSubmitted => {
                tracing::error!(error = %e, "inconsistent attempt data");
                return ApiError::internal();
            }
        };
        ApiError::new(code, e.to_string())
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> ApiError {
        match e {
            StoreError::DuplicateUsername(_) => {
                ApiError::new(ErrorCode::UsernameTaken, e.to_string())
            }
            e => {
                tracing::error!(error = %e, "store failure");
                ApiError::internal()
            }
        }
    }
}
