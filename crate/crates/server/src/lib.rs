//! HTTP exam service: the Manager (authoring, administration) and student
//! (exam taking) sides of the testing server, over the core compiler and
//! store.
//!
//! [`ExamService`] holds the operations; [`http::router`] exposes them as
//! JSON routes. See `docs/api.md` for the wire contract.

pub mod auth;
pub mod clock;
pub mod error;
pub mod http;
pub mod service;

pub use auth::{PasswordParams, Session};
pub use clock::{Clock, ManualClock, SystemClock};
pub use error::{ApiError, ErrorCode};
pub use service::{ExamService, ServiceConfig};
