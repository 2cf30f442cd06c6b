//! JSON-over-HTTP binding of [`ExamService`].

use std::future::Future;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, FromRequestParts, Path, Request, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::Router;
use cbt_core::content::{AttemptId, ExamId, ExamState, QuestionDraft};
use cbt_core::store::Role;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;

use crate::auth::Session;
use crate::error::ApiError;
use crate::service::{AnswerRequest, ExamService, NewExam};

type Svc = Arc<ExamService>;

pub fn router(service: Svc) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/login", post(login))
        .route("/api/logout", post(logout))
        .route("/api/users", post(create_user))
        .route("/api/exams", post(create_exam).get(list_exams))
        .route("/api/exams/{id}", get(get_exam))
        .route("/api/exams/{id}/questions", post(add_question))
        .route("/api/exams/{id}/state", post(set_state))
        .route("/api/exams/{id}/results", get(results))
        .route("/api/render", post(render))
        .route("/api/student/exams", get(student_exams))
        .route("/api/student/exams/{id}/attempts", post(begin_attempt))
        .route("/api/attempts/{id}", get(get_attempt))
        .route("/api/attempts/{id}/answers", put(answer))
        .route("/api/attempts/{id}/submit", post(submit))
        .fallback(no_route)
        .method_not_allowed_fallback(no_route)
        .with_state(service)
}

/// Serves until `shutdown` resolves, then drains in-flight requests.
pub async fn serve(
    listener: TcpListener,
    service: Svc,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(service))
        .with_graceful_shutdown(shutdown)
        .await
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        json_response(status, &self)
    }
}

/// Serializes `value` with `<`, `>` and `&` written as `\u` escapes, so no
/// response body contains markup even where it echoes author input.
/// Outside strings JSON never uses these characters, so decoding is
/// unaffected.
fn json_response<T: Serialize>(status: StatusCode, value: &T) -> Response {
    let Ok(raw) = serde_json::to_string(value) else {
        tracing::error!("response serialization failed");
        return StatusCode::INTERNAL_SERVER_ERROR.into_response();
    };
    let mut body = String::with_capacity(raw.len());
    for c in raw.chars() {
        match c {
            '<' => body.push_str("\\u003c"),
            '>' => body.push_str("\\u003e"),
            '&' => body.push_str("\\u0026"),
            c => body.push(c),
        }
    }
    (
        status,
        [
            (header::CONTENT_TYPE, "application/json"),
            (header::X_CONTENT_TYPE_OPTIONS, "nosniff"),
        ],
        body,
    )
        .into_response()
}

/// `axum::Json` with rejections reported as our 400.
struct Json<T>(T);

impl<S, T> FromRequest<S> for Json<T>
where
    T: DeserializeOwned,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        match axum::Json::<T>::from_request(req, state).await {
            Ok(axum::Json(v)) => Ok(Json(v)),
            Err(e) => Err(ApiError::bad_request(match e {
                JsonRejection::MissingJsonContentType(_) => {
                    "expected `Content-Type: application/json`".to_string()
                }
                e => e.body_text(),
            })),
        }
    }
}

/// The authenticated caller, from `Authorization: Bearer <token>`.
struct Auth(Session);

impl FromRequestParts<Svc> for Auth {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, service: &Svc) -> Result<Self, ApiError> {
        let token = parts
            .headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or_else(ApiError::unauthorized)?;
        service.authenticate(token).map(Auth)
    }
}

/// Runs a service call off the async workers: calls may fsync or hash
/// passwords.
async fn call<T, F>(service: Svc, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&ExamService) -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&service))
        .await
        .unwrap_or_else(|e| {
            tracing::error!(error = %e, "service call panicked");
            Err(ApiError::internal())
        })
}

fn ok<T: Serialize>(r: Result<T, ApiError>) -> Response {
    match r {
        Ok(v) => json_response(StatusCode::OK, &v),
        Err(e) => e.into_response(),
    }
}

fn created<T: Serialize>(r: Result<T, ApiError>) -> Response {
    match r {
        Ok(v) => json_response(StatusCode::CREATED, &v),
        Err(e) => e.into_response(),
    }
}

async fn no_route() -> ApiError {
    ApiError::new(crate::error::ErrorCode::NotFound, "no such route")
}

async fn health() -> Response {
    json_response(StatusCode::OK, &serde_json::json!({ "status": "ok" }))
}

#[derive(Deserialize)]
struct Credentials {
    username: String,
    password: String,
}

async fn login(State(svc): State<Svc>, Json(c): Json<Credentials>) -> Response {
    ok(call(svc, move |s| s.login(&c.username, &c.password)).await)
}

async fn logout(State(svc): State<Svc>, Auth(caller): Auth) -> Response {
    svc.logout(&caller);
    StatusCode::NO_CONTENT.into_response()
}

#[derive(Deserialize)]
struct NewUser {
    username: String,
    password: String,
    #[serde(default = "student")]
    role: Role,
}

fn student() -> Role {
    Role::Student
}

async fn create_user(
    State(svc): State<Svc>,
    Auth(caller): Auth,
    Json(u): Json<NewUser>,
) -> Response {
    created(
        call(svc, move |s| {
            s.create_user(&caller, &u.username, &u.password, u.role)
        })
        .await,
    )
}

async fn create_exam(
    State(svc): State<Svc>,
    Auth(caller): Auth,
    Json(new): Json<NewExam>,
) -> Response {
    created(call(svc, move |s| s.create_exam(&caller, &new)).await)
}

async fn list_exams(State(svc): State<Svc>, Auth(caller): Auth) -> Response {
    ok(call(svc, move |s| s.list_exams(&caller)).await)
}

async fn get_exam(State(svc): State<Svc>, Auth(caller): Auth, Path(id): Path<ExamId>) -> Response {
    ok(call(svc, move |s| s.get_exam(&caller, &id)).await)
}

async fn add_question(
    State(svc): State<Svc>,
    Auth(caller): Auth,
    Path(id): Path<ExamId>,
    Json(draft): Json<QuestionDraft>,
) -> Response {
    created(call(svc, move |s| s.add_question(&caller, &id, &draft)).await)
}

#[derive(Deserialize)]
struct StateChange {
    state: ExamState,
}

async fn set_state(
    State(svc): State<Svc>,
    Auth(caller): Auth,
    Path(id): Path<ExamId>,
    Json(c): Json<StateChange>,
) -> Response {
    ok(call(svc, move |s| s.set_exam_state(&caller, &id, c.state)).await)
}

async fn results(State(svc): State<Svc>, Auth(caller): Auth, Path(id): Path<ExamId>) -> Response {
    ok(call(svc, move |s| s.get_results(&caller, &id)).await)
}

#[derive(Deserialize)]
struct RenderRequest {
    source: String,
}

async fn render(
    State(svc): State<Svc>,
    Auth(caller): Auth,
    Json(r): Json<RenderRequest>,
) -> Response {
    ok(call(svc, move |s| s.preview(&caller, &r.source)).await)
}

async fn student_exams(State(svc): State<Svc>, Auth(caller): Auth) -> Response {
    ok(call(svc, move |s| s.list_student_exams(&caller)).await)
}

async fn begin_attempt(
    State(svc): State<Svc>,
    Auth(caller): Auth,
    Path(id): Path<ExamId>,
) -> Response {
    created(call(svc, move |s| s.begin_attempt(&caller, &id)).await)
}

async fn get_attempt(
    State(svc): State<Svc>,
    Auth(caller): Auth,
    Path(id): Path<AttemptId>,
) -> Response {
    ok(call(svc, move |s| s.get_attempt(&caller, &id)).await)
}

async fn answer(
    State(svc): State<Svc>,
    Auth(caller): Auth,
    Path(id): Path<AttemptId>,
    Json(a): Json<AnswerRequest>,
) -> Response {
    ok(call(svc, move |s| s.record_answer(&caller, &id, &a)).await)
}

async fn submit(State(svc): State<Svc>, Auth(caller): Auth, Path(id): Path<AttemptId>) -> Response {
    ok(call(svc, move |s| s.submit_attempt(&caller, &id)).await)
}
