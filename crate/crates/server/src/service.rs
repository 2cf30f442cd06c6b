//! The exam service: every API operation as a plain method.
//!
//! Methods take the caller's [`Session`] (see [`ExamService::authenticate`])
//! and return view types that serialize straight to the HTTP responses.
//! All cross-request coordination happens inside `Store::transact`.

use std::collections::BTreeMap;
use std::sync::Arc;

use cbt_core::content::{
    compile_question_with, student_view, Attempt, AttemptId, AttemptState, Exam, ExamId, ExamState,
    ExamSummary, Label, Question, QuestionDraft, QuestionId, Score, StudentExam, UserId,
};
use cbt_core::markup::{compile, MarkupError, RenderedFragment, RENDERER_VERSION};
use cbt_core::store::{CacheEntry, CacheKey, Role, Store, Txn, User};
use cbt_core::{content_hash, SourceHash};
use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use crate::auth::{PasswordParams, Passwords, Session, Sessions};
use crate::clock::{Clock, SystemClock};
use crate::error::{ApiError, ErrorCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServiceConfig {
    /// Lifetime of a fresh login.
    pub token_ttl: Duration,
    /// How long a student's session outlives their attempt deadline.
    pub deadline_grace: Duration,
    pub passwords: PasswordParams,
}

impl Default for ServiceConfig {
    fn default() -> ServiceConfig {
        ServiceConfig {
            token_ttl: Duration::minutes(60),
            deadline_grace: Duration::minutes(60),
            passwords: PasswordParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoginResponse {
    pub token: String,
    pub user_id: UserId,
    pub username: String,
    pub role: Role,
    pub expires_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserView {
    pub user_id: UserId,
    pub username: String,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewExam {
    pub title: String,
    #[serde(default)]
    pub course_code: String,
    pub duration_minutes: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExamOverview {
    pub exam_id: ExamId,
    pub title: String,
    pub course_code: String,
    pub duration_minutes: u32,
    pub state: ExamState,
    pub question_count: usize,
}

/// Live preview result. Markup errors are data here, not a failed request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preview {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub html: Option<String>,
    pub source_hash: SourceHash,
    pub renderer_version: u32,
    pub errors: Vec<MarkupError>,
}

/// An attempt as its student sees it: no answer key, no sources.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptView {
    pub attempt_id: AttemptId,
    pub state: AttemptState,
    pub started_at: DateTime<Utc>,
    pub deadline: DateTime<Utc>,
    pub answers: BTreeMap<QuestionId, Label>,
    pub exam: StudentExam,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRequest {
    pub question_id: QuestionId,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerAck {
    pub attempt_id: AttemptId,
    pub question_id: QuestionId,
    pub label: Label,
}

/// A score as returned to the student who earned it. The answer key is
/// withheld; only the points per question are shown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudentScore {
    pub attempt_id: AttemptId,
    pub points_earned: u32,
    pub points_total: u32,
    pub submitted_at: DateTime<Utc>,
    pub per_question: BTreeMap<QuestionId, QuestionResult>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionResult {
    pub chosen: Option<Label>,
    pub earned: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRow {
    pub attempt_id: AttemptId,
    pub student_id: UserId,
    pub username: String,
    pub submitted_at: DateTime<Utc>,
    pub score: Score,
}

pub struct ExamService {
    store: Arc<Store>,
    clock: Arc<dyn Clock>,
    config: ServiceConfig,
    passwords: Passwords,
    sessions: Sessions,
}

impl ExamService {
    pub fn new(
        store: Arc<Store>,
        clock: Arc<dyn Clock>,
        config: ServiceConfig,
    ) -> Result<ExamService, argon2::Error> {
        Ok(ExamService {
            passwords: Passwords::new(config.passwords)?,
            store,
            clock,
            config,
            sessions: Sessions::default(),
        })
    }

    pub fn with_defaults(store: Arc<Store>) -> ExamService {
        ExamService::new(store, Arc::new(SystemClock), ServiceConfig::default())
            .expect("default parameters are valid")
    }

    pub fn store(&self) -> &Arc<Store> {
        &self.store
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    /// Creates the first manager account if the store has no users at all.
    /// Returns the new account, or `None` if users already exist.
    pub fn bootstrap_manager(
        &self,
        username: &str,
        password: &str,
    ) -> Result<Option<UserView>, ApiError> {
        validate_credentials(username, password)?;
        let password_hash = self.passwords.hash(password);
        self.store.transact(|txn| {
            if !txn.list::<User>(|_| true).is_empty() {
                return Ok(None);
            }
            let user = User {
                id: UserId::generate(),
                username: username.to_string(),
                password_hash,
                role: Role::Manager,
            };
            txn.put(user.clone())?;
            Ok(Some(user_view(&user)))
        })
    }

    pub fn login(&self, username: &str, password: &str) -> Result<LoginResponse, ApiError> {
        let Some(user) = self.store.user_by_name(username) else {
            self.passwords.burn(password);
            return Err(ApiError::bad_credentials());
        };
        if !self.passwords.verify(password, &user.password_hash) {
            return Err(ApiError::bad_credentials());
        }
        let now = self.now();
        let session = self.sessions.issue(
            user.id,
            user.username,
            user.role,
            now + self.config.token_ttl,
            now,
        );
        Ok(LoginResponse {
            token: session.token,
            user_id: session.user_id,
            username: session.username,
            role: session.role,
            expires_at: session.expires_at,
        })
    }

    pub fn logout(&self, session: &Session) {
        self.sessions.revoke(&session.token);
    }

    /// Resolves a bearer token; 401 if unknown or expired.
    pub fn authenticate(&self, token: &str) -> Result<Session, ApiError> {
        self.sessions
            .lookup(token, self.now())
            .ok_or_else(ApiError::unauthorized)
    }

    pub fn create_user(
        &self,
        caller: &Session,
        username: &str,
        password: &str,
        role: Role,
    ) -> Result<UserView, ApiError> {
        require(caller, Role::Manager)?;
        validate_credentials(username, password)?;
        let user = User {
            id: UserId::generate(),
            username: username.to_string(),
            password_hash: self.passwords.hash(password),
            role,
        };
        self.store.put(user.clone())?;
        Ok(user_view(&user))
    }

    pub fn create_exam(&self, caller: &Session, new: &NewExam) -> Result<Exam, ApiError> {
        require(caller, Role::Manager)?;
        let exam = Exam::new(&new.title, &new.course_code, new.duration_minutes)?;
        self.store.put(exam.clone())?;
        Ok(exam)
    }

    pub fn list_exams(&self, caller: &Session) -> Result<Vec<ExamOverview>, ApiError> {
        require(caller, Role::Manager)?;
        Ok(self
            .store
            .list::<Exam>(|_| true)
            .iter()
            .map(|e| ExamOverview {
                exam_id: e.id.clone(),
                title: e.title.clone(),
                course_code: e.course_code.clone(),
                duration_minutes: e.duration_minutes,
                state: e.state,
                question_count: e.questions.len(),
            })
            .collect())
    }

    /// The full exam, sources and answer key included.
    pub fn get_exam(&self, caller: &Session, exam_id: &ExamId) -> Result<Exam, ApiError> {
        require(caller, Role::Manager)?;
        self.store
            .get::<Exam>(exam_id)
            .ok_or_else(|| exam_not_found(exam_id))
    }

    pub fn add_question(
        &self,
        caller: &Session,
        exam_id: &ExamId,
        draft: &QuestionDraft,
    ) -> Result<Question, ApiError> {
        require(caller, Role::Manager)?;
        self.store.transact(|txn| {
            let mut exam = txn
                .get::<Exam>(exam_id)
                .ok_or_else(|| exam_not_found(exam_id))?;
            if exam.state != ExamState::Draft {
                return Err(cbt_core::content::ContentError::NotDraft(exam.state).into());
            }
            let question = compile_question_with(draft, |src| render_cached(txn, src))?;
            exam.add_question(question.clone())?;
            txn.put(exam)?;
            Ok(question)
        })
    }

    /// Renders without persisting anything.
    pub fn preview(&self, caller: &Session, source: &str) -> Result<Preview, ApiError> {
        require(caller, Role::Manager)?;
        let source_hash = content_hash(source);
        let cached = self
            .store
            .cached_fragment(source_hash, RENDERER_VERSION)
            .filter(|c| c.fragment.source_hash == source_hash);
        let (html, errors) = match cached {
            Some(entry) => (Some(entry.fragment.html), vec![]),
            None => match compile(source) {
                Ok(fragment) => (Some(fragment.html), vec![]),
                Err(e) => (None, vec![e]),
            },
        };
        Ok(Preview {
            html,
            source_hash,
            renderer_version: RENDERER_VERSION,
            errors,
        })
    }

    pub fn set_exam_state(
        &self,
        caller: &Session,
        exam_id: &ExamId,
        to: ExamState,
    ) -> Result<Exam, ApiError> {
        require(caller, Role::Manager)?;
        self.store.transact(|txn| {
            let mut exam = txn
                .get::<Exam>(exam_id)
                .ok_or_else(|| exam_not_found(exam_id))?;
            exam.transition(to)?;
            if to == ExamState::Started {
                refresh_fragments(txn, &mut exam);
            }
            txn.put(exam.clone())?;
            Ok(exam)
        })
    }

    pub fn list_student_exams(&self, caller: &Session) -> Result<Vec<ExamSummary>, ApiError> {
        require(caller, Role::Student)?;
        Ok(self
            .store
            .list::<Exam>(|e| e.state == ExamState::Started)
            .iter()
            .map(ExamSummary::of)
            .collect())
    }

    /// Starts the caller's single attempt at `exam_id`.
    pub fn begin_attempt(
        &self,
        caller: &Session,
        exam_id: &ExamId,
    ) -> Result<AttemptView, ApiError> {
        require(caller, Role::Student)?;
        let now = self.now();
        let view = self.store.transact(|txn| {
            let exam = txn
                .get::<Exam>(exam_id)
                .ok_or_else(|| exam_not_found(exam_id))?;
            let existing =
                txn.list::<Attempt>(|a| a.exam_id == *exam_id && a.student_id == caller.user_id);
            if !existing.is_empty() {
                return Err(ApiError::new(
                    ErrorCode::AlreadyAttempted,
                    "you have already started this exam",
                ));
            }
            let attempt = Attempt::begin(&exam, caller.user_id.clone(), now)?;
            txn.put(attempt.clone())?;
            attempt_view(&attempt, &exam)
        })?;
        self.sessions
            .extend(&caller.token, view.deadline + self.config.deadline_grace);
        Ok(view)
    }

    /// Re-fetches an attempt that is still open, e.g. after a reconnect.
    pub fn get_attempt(
        &self,
        caller: &Session,
        attempt_id: &AttemptId,
    ) -> Result<AttemptView, ApiError> {
        let (attempt, exam) = self.owned_attempt(caller, attempt_id)?;
        if attempt.state == AttemptState::Submitted {
            return Err(cbt_core::content::ContentError::AttemptClosed.into());
        }
        if !attempt.is_open_at(self.now()) {
            return Err(cbt_core::content::ContentError::DeadlinePassed.into());
        }
        attempt_view(&attempt, &exam)
    }

    pub fn record_answer(
        &self,
        caller: &Session,
        attempt_id: &AttemptId,
        answer: &AnswerRequest,
    ) -> Result<AnswerAck, ApiError> {
        let now = self.now();
        self.store.transact(|txn| {
            let (mut attempt, exam) = owned_attempt_in(txn, caller, attempt_id)?;
            let label: Label = answer.label.parse().map_err(|_| {
                ApiError::new(
                    ErrorCode::UnknownLabel,
                    format!("`{}` is not an option label", answer.label),
                )
            })?;
            attempt.record_answer(&exam, &answer.question_id, label, now)?;
            txn.put(attempt)?;
            Ok(AnswerAck {
                attempt_id: attempt_id.clone(),
                question_id: answer.question_id.clone(),
                label,
            })
        })
    }

    /// Closes and grades the attempt. A second submit is a 409, never a
    /// second grading.
    pub fn submit_attempt(
        &self,
        caller: &Session,
        attempt_id: &AttemptId,
    ) -> Result<StudentScore, ApiError> {
        let now = self.now();
        self.store.transact(|txn| {
            let (mut attempt, exam) = owned_attempt_in(txn, caller, attempt_id)?;
            let score = attempt.submit(&exam, now)?;
            let submitted_at = attempt.submitted_at.expect("set by submit");
            txn.put(attempt)?;
            Ok(StudentScore {
                attempt_id: attempt_id.clone(),
                points_earned: score.points_earned,
                points_total: score.points_total,
                submitted_at,
                per_question: score
                    .per_question
                    .into_iter()
                    .map(|(q, s)| {
                        (
                            q,
                            QuestionResult {
                                chosen: s.chosen,
                                earned: s.earned,
                            },
                        )
                    })
                    .collect(),
            })
        })
    }

    /// One row per submitted attempt, oldest submission first.
    pub fn get_results(
        &self,
        caller: &Session,
        exam_id: &ExamId,
    ) -> Result<Vec<ResultRow>, ApiError> {
        require(caller, Role::Manager)?;
        if self.store.get::<Exam>(exam_id).is_none() {
            return Err(exam_not_found(exam_id));
        }
        let mut rows: Vec<ResultRow> = self
            .store
            .list::<Attempt>(|a| a.exam_id == *exam_id && a.state == AttemptState::Submitted)
            .into_iter()
            .filter_map(|a| {
                let username = self
                    .store
                    .get::<User>(&a.student_id)
                    .map(|u| u.username)
                    .unwrap_or_default();
                Some(ResultRow {
                    attempt_id: a.id,
                    student_id: a.student_id,
                    username,
                    submitted_at: a.submitted_at?,
                    score: a.score?,
                })
            })
            .collect();
        rows.sort_by(|a, b| (a.submitted_at, &a.attempt_id).cmp(&(b.submitted_at, &b.attempt_id)));
        Ok(rows)
    }

    fn owned_attempt(
        &self,
        caller: &Session,
        attempt_id: &AttemptId,
    ) -> Result<(Attempt, Exam), ApiError> {
        self.store
            .transact(|txn| owned_attempt_in(txn, caller, attempt_id))
    }
}

fn require(caller: &Session, role: Role) -> Result<(), ApiError> {
    if caller.role == role {
        Ok(())
    } else {
        Err(ApiError::forbidden(match role {
            Role::Manager => "this operation requires a manager account",
            Role::Student => "this operation is for student accounts",
        }))
    }
}

fn validate_credentials(username: &str, password: &str) -> Result<(), ApiError> {
    let ok_name = !username.is_empty()
        && username.len() <= 64
        && username
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "._-@".contains(c));
    if !ok_name {
        return Err(ApiError::new(
            ErrorCode::InvalidUser,
            "username must be 1-64 characters of letters, digits, `.`, `_`, `-` or `@`",
        ));
    }
    if password.chars().count() < 8 {
        return Err(ApiError::new(
            ErrorCode::InvalidUser,
            "password must be at least 8 characters",
        ));
    }
    Ok(())
}

fn user_view(user: &User) -> UserView {
    UserView {
        user_id: user.id.clone(),
        username: user.username.clone(),
        role: user.role,
    }
}

fn exam_not_found(id: &ExamId) -> ApiError {
    ApiError::not_found("exam", id.as_str())
}

fn owned_attempt_in(
    txn: &Txn<'_>,
    caller: &Session,
    attempt_id: &AttemptId,
) -> Result<(Attempt, Exam), ApiError> {
    require(caller, Role::Student)?;
    let attempt = txn
        .get::<Attempt>(attempt_id)
        .ok_or_else(|| ApiError::not_found("attempt", attempt_id.as_str()))?;
    if attempt.student_id != caller.user_id {
        return Err(ApiError::forbidden(
            "this attempt belongs to another student",
        ));
    }
    let exam = txn.get::<Exam>(&attempt.exam_id).ok_or_else(|| {
        tracing::error!(attempt = %attempt_id, exam = %attempt.exam_id, "attempt refers to a missing exam");
        ApiError::internal()
    })?;
    Ok((attempt, exam))
}

fn attempt_view(attempt: &Attempt, exam: &Exam) -> Result<AttemptView, ApiError> {
    Ok(AttemptView {
        attempt_id: attempt.id.clone(),
        state: attempt.state,
        started_at: attempt.started_at,
        deadline: attempt.deadline,
        answers: attempt.answers.clone(),
        exam: student_view(exam)?,
    })
}

/// Compiles `source`, reusing and filling the fragment cache.
fn render_cached(txn: &mut Txn<'_>, source: &str) -> Result<RenderedFragment, MarkupError> {
    let key = CacheKey {
        source_hash: content_hash(source),
        renderer_version: RENDERER_VERSION,
    };
    if let Some(hit) = txn.get::<CacheEntry>(&key) {
        return Ok(hit.fragment);
    }
    let fragment = compile(source)?;
    // A cache write can only fail on a duplicate username, which this is not.
    let _ = txn.put(CacheEntry::new(fragment.clone()));
    Ok(fragment)
}

/// Re-renders any fragment produced by an older renderer.
fn refresh_fragments(txn: &mut Txn<'_>, exam: &mut Exam) {
    for q in &mut exam.questions {
        if !q.stem_fragment.is_current_for(&q.stem_source) {
            if let Ok(f) = render_cached(txn, &q.stem_source) {
                q.stem_fragment = f;
            }
        }
        for c in &mut q.options {
            if !c.fragment.is_current_for(&c.source) {
                if let Ok(f) = render_cached(txn, &c.source) {
                    c.fragment = f;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::ManualClock;

    struct Fixture {
        svc: ExamService,
        clock: Arc<ManualClock>,
        manager: Session,
    }

    fn t0() -> DateTime<Utc> {
        "2026-05-04T08:00:00Z".parse().unwrap()
    }

    fn fixture() -> Fixture {
        let clock = Arc::new(ManualClock::new(t0()));
        let config = ServiceConfig {
            passwords: PasswordParams::INSECURE_FAST,
            ..ServiceConfig::default()
        };
        let svc = ExamService::new(Arc::new(Store::in_memory()), clock.clone(), config).unwrap();
        svc.bootstrap_manager("admin", "admin-password")
            .unwrap()
            .unwrap();
        let token = svc.login("admin", "admin-password").unwrap().token;
        let manager = svc.authenticate(&token).unwrap();
        Fixture {
            svc,
            clock,
            manager,
        }
    }

    impl Fixture {
        fn student(&self, name: &str) -> Session {
            self.svc
                .create_user(&self.manager, name, "student-pw", Role::Student)
                .unwrap();
            let token = self.svc.login(name, "student-pw").unwrap().token;
            self.svc.authenticate(&token).unwrap()
        }

        fn exam(&self, questions: usize) -> Exam {
            let exam = self
                .svc
                .create_exam(
                    &self.manager,
                    &NewExam {
                        title: "Engineering Mathematics III".into(),
                        course_code: "FEG 303".into(),
                        duration_minutes: 60,
                    },
                )
                .unwrap();
            for i in 0..questions {
                self.svc
                    .add_question(
                        &self.manager,
                        &exam.id,
                        &draft(&format!("Q{i} $\\sum_{{k=1}}^{{2}} a*b^2$"), "B"),
                    )
                    .unwrap();
            }
            exam
        }

        fn started(&self, questions: usize) -> Exam {
            let exam = self.exam(questions);
            self.svc
                .set_exam_state(&self.manager, &exam.id, ExamState::Started)
                .unwrap()
        }
    }

    fn draft(stem: &str, correct: &str) -> QuestionDraft {
        QuestionDraft {
            stem_source: stem.into(),
            options: vec!["$1$".into(), "$2$".into(), "$3$".into(), "$4$".into()],
            correct_label: correct.into(),
            points: 1,
        }
    }

    fn code<T: std::fmt::Debug>(r: Result<T, ApiError>) -> ErrorCode {
        r.unwrap_err().code
    }

    #[test]
    fn bootstrap_only_once() {
        let f = fixture();
        assert_eq!(f.svc.bootstrap_manager("other", "password1").unwrap(), None);
        assert_eq!(f.manager.role, Role::Manager);
    }

    #[test]
    fn login_failures_are_indistinguishable() {
        let f = fixture();
        let unknown = f.svc.login("ghost", "whatever!").unwrap_err();
        let wrong = f.svc.login("admin", "wrong-password").unwrap_err();
        assert_eq!(unknown, wrong);
        assert_eq!(unknown.status, 401);
    }

    #[test]
    fn tokens_expire() {
        let f = fixture();
        f.clock.advance(Duration::minutes(61));
        assert_eq!(
            code(f.svc.authenticate(&f.manager.token)),
            ErrorCode::Unauthorized
        );
    }

    #[test]
    fn exam_creation_rules() {
        let f = fixture();
        let s = f.student("stu");
        let bad = NewExam {
            title: "T".into(),
            course_code: String::new(),
            duration_minutes: 0,
        };
        assert_eq!(
            code(f.svc.create_exam(&f.manager, &bad)),
            ErrorCode::InvalidExam
        );
        assert_eq!(code(f.svc.create_exam(&s, &bad)), ErrorCode::Forbidden);
        let exam = f.exam(0);
        assert_eq!(exam.state, ExamState::Draft);
        assert!(exam.questions.is_empty());
    }

    #[test]
    fn add_question_rules() {
        let f = fixture();
        let exam = f.exam(0);
        let q = f
            .svc
            .add_question(&f.manager, &exam.id, &draft("$\\sum_{k=1}^{2} a*b^2$", "A"))
            .unwrap();
        assert!(q.stem_fragment.html.contains("<msubsup><mo>∑</mo>"));
        let err = f
            .svc
            .add_question(&f.manager, &exam.id, &draft("x", "E"))
            .unwrap_err();
        assert_eq!(err.code, ErrorCode::ValidationFailed);
        let err = f
            .svc
            .add_question(&f.manager, &exam.id, &draft("${", "A"))
            .unwrap_err();
        let detail = err.detail.unwrap();
        assert_eq!(detail[0]["error"]["kind"], "unbalanced_brace");
        assert_eq!(detail[0]["error"]["pos"]["offset"], 1);
        assert_eq!(
            code(
                f.svc
                    .add_question(&f.manager, &"nope".into(), &draft("x", "A"))
            ),
            ErrorCode::NotFound
        );
        f.svc
            .set_exam_state(&f.manager, &exam.id, ExamState::Started)
            .unwrap();
        assert_eq!(
            code(f.svc.add_question(&f.manager, &exam.id, &draft("x", "A"))),
            ErrorCode::ExamNotDraft
        );
        assert_eq!(
            f.svc
                .get_exam(&f.manager, &exam.id)
                .unwrap()
                .questions
                .len(),
            1
        );
    }

    #[test]
    fn question_fragments_come_from_the_cache() {
        let f = fixture();
        let exam = f.exam(2);
        let stored = f.svc.get_exam(&f.manager, &exam.id).unwrap();
        for q in &stored.questions {
            let hit = f
                .svc
                .store()
                .cached_fragment(q.stem_fragment.source_hash, RENDERER_VERSION)
                .unwrap();
            assert_eq!(hit.fragment, q.stem_fragment);
        }
    }

    #[test]
    fn preview_reports_errors_in_body() {
        let f = fixture();
        let ok = f
            .svc
            .preview(&f.manager, "$\\sum_{k=1}^{2} a*b^2$")
            .unwrap();
        assert!(ok.html.unwrap().contains("msubsup"));
        assert!(ok.errors.is_empty());
        let bad = f.svc.preview(&f.manager, "$x^2^3$").unwrap();
        assert_eq!(bad.html, None);
        assert_eq!(bad.errors[0].pos.offset, 4);
        let empty = f.svc.preview(&f.manager, "").unwrap();
        assert_eq!(empty.html.as_deref(), Some(""));
        assert!(f
            .svc
            .store()
            .cached_fragment(content_hash(""), RENDERER_VERSION)
            .is_none());
        let s = f.student("stu");
        assert_eq!(code(f.svc.preview(&s, "x")), ErrorCode::Forbidden);
    }

    #[test]
    fn state_machine_through_the_service() {
        let f = fixture();
        let empty = f.exam(0);
        assert_eq!(
            code(
                f.svc
                    .set_exam_state(&f.manager, &empty.id, ExamState::Started)
            ),
            ErrorCode::NoQuestions
        );
        let exam = f.exam(2);
        assert_eq!(
            code(
                f.svc
                    .set_exam_state(&f.manager, &exam.id, ExamState::Stopped)
            ),
            ErrorCode::IllegalTransition
        );
        f.svc
            .set_exam_state(&f.manager, &exam.id, ExamState::Started)
            .unwrap();
        f.svc
            .set_exam_state(&f.manager, &exam.id, ExamState::Stopped)
            .unwrap();
        assert_eq!(
            code(
                f.svc
                    .set_exam_state(&f.manager, &exam.id, ExamState::Started)
            ),
            ErrorCode::IllegalTransition
        );
        assert_eq!(
            code(
                f.svc
                    .set_exam_state(&f.manager, &"x".into(), ExamState::Started)
            ),
            ErrorCode::NotFound
        );
    }

    #[test]
    fn student_listing() {
        let f = fixture();
        let s = f.student("stu");
        assert!(f.svc.list_student_exams(&s).unwrap().is_empty());
        f.exam(1);
        let started = f.started(1);
        let stopped = f.started(1);
        f.svc
            .set_exam_state(&f.manager, &stopped.id, ExamState::Stopped)
            .unwrap();
        let list = f.svc.list_student_exams(&s).unwrap();
        assert_eq!(list.len(), 1);
        assert_eq!(list[0].exam_id, started.id);
        assert_eq!(
            code(f.svc.list_student_exams(&f.manager)),
            ErrorCode::Forbidden
        );
    }

    #[test]
    fn attempt_lifecycle() {
        let f = fixture();
        let s = f.student("stu");
        let draft_exam = f.exam(1);
        assert_eq!(
            code(f.svc.begin_attempt(&s, &draft_exam.id)),
            ErrorCode::ExamNotStarted
        );
        assert_eq!(
            code(f.svc.begin_attempt(&s, &"x".into())),
            ErrorCode::NotFound
        );
        let exam = f.started(3);
        let view = f.svc.begin_attempt(&s, &exam.id).unwrap();
        assert_eq!(view.deadline, t0() + Duration::minutes(60));
        let json = serde_json::to_string(&view).unwrap();
        assert!(!json.contains("correct"));
        assert!(!json.contains("\\sum"));
        assert_eq!(
            code(f.svc.begin_attempt(&s, &exam.id)),
            ErrorCode::AlreadyAttempted
        );

        let qs: Vec<QuestionId> = view
            .exam
            .questions
            .iter()
            .map(|q| q.question_id.clone())
            .collect();
        let answer = |q: &QuestionId, l: &str| AnswerRequest {
            question_id: q.clone(),
            label: l.into(),
        };
        f.svc
            .record_answer(&s, &view.attempt_id, &answer(&qs[0], "A"))
            .unwrap();
        f.svc
            .record_answer(&s, &view.attempt_id, &answer(&qs[0], "B"))
            .unwrap();
        f.svc
            .record_answer(&s, &view.attempt_id, &answer(&qs[1], "B"))
            .unwrap();
        f.svc
            .record_answer(&s, &view.attempt_id, &answer(&qs[2], "C"))
            .unwrap();
        assert_eq!(
            code(
                f.svc
                    .record_answer(&s, &view.attempt_id, &answer(&qs[0], "Z"))
            ),
            ErrorCode::UnknownLabel
        );
        assert_eq!(
            code(
                f.svc
                    .record_answer(&s, &view.attempt_id, &answer(&qs[0], "?"))
            ),
            ErrorCode::UnknownLabel
        );
        assert_eq!(
            code(
                f.svc
                    .record_answer(&s, &view.attempt_id, &answer(&"q".into(), "A"))
            ),
            ErrorCode::UnknownQuestion
        );
        let again = f.svc.get_attempt(&s, &view.attempt_id).unwrap();
        assert_eq!(again.answers[&qs[0]].to_string(), "B");

        let other = f.student("other");
        assert_eq!(
            code(
                f.svc
                    .record_answer(&other, &view.attempt_id, &answer(&qs[0], "A"))
            ),
            ErrorCode::Forbidden
        );
        assert_eq!(
            code(f.svc.submit_attempt(&other, &view.attempt_id)),
            ErrorCode::Forbidden
        );

        f.clock.advance(Duration::minutes(10));
        let score = f.svc.submit_attempt(&s, &view.attempt_id).unwrap();
        assert_eq!((score.points_earned, score.points_total), (2, 3));
        assert!(!serde_json::to_string(&score).unwrap().contains("correct"));
        assert_eq!(
            code(f.svc.submit_attempt(&s, &view.attempt_id)),
            ErrorCode::AttemptSubmitted
        );
        assert_eq!(
            code(
                f.svc
                    .record_answer(&s, &view.attempt_id, &answer(&qs[0], "A"))
            ),
            ErrorCode::AttemptSubmitted
        );
        assert_eq!(
            code(f.svc.get_attempt(&s, &view.attempt_id)),
            ErrorCode::AttemptSubmitted
        );

        let rows = f.svc.get_results(&f.manager, &exam.id).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].username, "stu");
        assert_eq!(rows[0].score.points_earned, 2);
        assert_eq!(code(f.svc.get_results(&s, &exam.id)), ErrorCode::Forbidden);
        assert_eq!(
            code(f.svc.get_results(&f.manager, &"x".into())),
            ErrorCode::NotFound
        );
    }

    #[test]
    fn deadline_is_enforced_and_session_outlives_it() {
        let f = fixture();
        let s = f.student("stu");
        let exam = f.started(1);
        let view = f.svc.begin_attempt(&s, &exam.id).unwrap();
        let q = view.exam.questions[0].question_id.clone();
        f.clock.set(view.deadline);
        let late = AnswerRequest {
            question_id: q,
            label: "A".into(),
        };
        assert_eq!(
            code(f.svc.record_answer(&s, &view.attempt_id, &late)),
            ErrorCode::DeadlinePassed
        );
        assert_eq!(
            code(f.svc.get_attempt(&s, &view.attempt_id)),
            ErrorCode::DeadlinePassed
        );
        // Still logged in past the normal 60 minute lifetime, so a late submit works.
        assert!(f.svc.authenticate(&s.token).is_ok());
        let score = f.svc.submit_attempt(&s, &view.attempt_id).unwrap();
        assert_eq!(score.points_earned, 0);
    }

    #[test]
    fn results_sorted_by_submission() {
        let f = fixture();
        let exam = f.started(1);
        let students: Vec<Session> = ["s1", "s2", "s3"].iter().map(|n| f.student(n)).collect();
        let attempts: Vec<AttemptId> = students
            .iter()
            .map(|s| f.svc.begin_attempt(s, &exam.id).unwrap().attempt_id)
            .collect();
        for i in [2, 0] {
            f.clock.advance(Duration::minutes(1));
            f.svc.submit_attempt(&students[i], &attempts[i]).unwrap();
        }
        let rows = f.svc.get_results(&f.manager, &exam.id).unwrap();
        let names: Vec<&str> = rows.iter().map(|r| r.username.as_str()).collect();
        assert_eq!(names, ["s3", "s1"]);
    }

    #[test]
    fn racing_begins_single_winner() {
        let f = fixture();
        let s = f.student("stu");
        let exam = f.started(1);
        let wins = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..16)
                .map(|_| scope.spawn(|| f.svc.begin_attempt(&s, &exam.id)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap())
                .collect::<Vec<_>>()
        });
        assert_eq!(wins.iter().filter(|r| r.is_ok()).count(), 1);
        assert!(wins
            .iter()
            .filter_map(|r| r.as_ref().err())
            .all(|e| e.code == ErrorCode::AlreadyAttempted));
    }

    #[test]
    fn user_management() {
        let f = fixture();
        assert_eq!(
            code(
                f.svc
                    .create_user(&f.manager, "admin", "password1", Role::Student)
            ),
            ErrorCode::UsernameTaken
        );
        assert_eq!(
            code(
                f.svc
                    .create_user(&f.manager, "bad name", "password1", Role::Student)
            ),
            ErrorCode::InvalidUser
        );
        assert_eq!(
            code(f.svc.create_user(&f.manager, "ok", "short", Role::Student)),
            ErrorCode::InvalidUser
        );
        let s = f.student("stu");
        assert_eq!(
            code(f.svc.create_user(&s, "x", "password1", Role::Student)),
            ErrorCode::Forbidden
        );
        let stored = f.svc.store().user_by_name("stu").unwrap();
        assert!(!stored.password_hash.contains("student-pw"));
    }
}
