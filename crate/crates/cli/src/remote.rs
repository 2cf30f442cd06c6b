use std::path::PathBuf;

use cbt_core::content::{Exam, ValidationError};
use cbt_core::exam_file::ExamFile;
use cbt_server::ApiError;
use clap::Args;
use reqwest::blocking::{Client, RequestBuilder};
use serde_json::{json, Value};

#[derive(Args)]
pub struct ServerArgs {
    /// Base URL of the running server.
    #[arg(long, env = "CBT_URL", default_value = "http://127.0.0.1:8080")]
    url: String,
    /// Session token of a manager account.
    #[arg(long, env = "CBT_TOKEN", hide_env_values = true)]
    token: String,
}

#[derive(Args)]
pub struct ImportArgs {
    /// Exam file to import.
    file: PathBuf,
    #[command(flatten)]
    server: ServerArgs,
}

#[derive(Args)]
pub struct ExportArgs {
    /// Id of the exam to export.
    exam_id: String,
    #[command(flatten)]
    server: ServerArgs,
}

/// Validates the whole file locally, then creates the exam and its
/// questions in order. Questions the server rejects are reported; nothing
/// already created is deleted.
pub fn import(args: ImportArgs) -> Result<(), String> {
    let path = args.file.display();
    let text = std::fs::read_to_string(&args.file)
        .map_err(|e| format!("error: cannot read {path}: {e}"))?;
    let file = ExamFile::load(&text).map_err(|problems| {
        let lines: Vec<String> = problems
            .iter()
            .map(|p| format!("error: {path}: {p}"))
            .collect();
        lines.join("\n")
    })?;

    let api = Api::new(&args.server);
    let spec = &file.exam;
    let exam = api.send(api.post("/api/exams").json(&json!({
        "title": spec.title,
        "course_code": spec.course_code,
        "duration_minutes": spec.duration_minutes,
    })))?;
    let exam_id = exam["id"]
        .as_str()
        .ok_or("error: server response lacks an exam id")?
        .to_string();

    let failures: Vec<String> = spec
        .questions
        .iter()
        .enumerate()
        .filter_map(|(i, q)| {
            api.send(
                api.post(&format!("/api/exams/{exam_id}/questions"))
                    .json(&q.to_draft()),
            )
            .err()
            .map(|e| format!("  question {}: {}", i + 1, e.trim_start_matches("error: ")))
        })
        .collect();
    if failures.is_empty() {
        println!("{exam_id}");
        Ok(())
    } else {
        Err(format!(
            "error: exam {exam_id} was created but {} of {} questions failed:\n{}",
            failures.len(),
            spec.questions.len(),
            failures.join("\n")
        ))
    }
}

pub fn export(args: ExportArgs) -> Result<(), String> {
    let api = Api::new(&args.server);
    let body = api.send(api.get(&format!("/api/exams/{}", args.exam_id)))?;
    let exam: Exam = serde_json::from_value(body)
        .map_err(|e| format!("error: unexpected response from server: {e}"))?;
    println!("{}", ExamFile::from_exam(&exam).to_json_pretty());
    Ok(())
}

struct Api<'a> {
    client: Client,
    base: &'a str,
    token: &'a str,
}

impl<'a> Api<'a> {
    fn new(args: &'a ServerArgs) -> Api<'a> {
        Api {
            client: Client::new(),
            base: args.url.trim_end_matches('/'),
            token: &args.token,
        }
    }

    fn get(&self, path: &str) -> RequestBuilder {
        self.client
            .get(format!("{}{path}", self.base))
            .bearer_auth(self.token)
    }

    fn post(&self, path: &str) -> RequestBuilder {
        self.client
            .post(format!("{}{path}", self.base))
            .bearer_auth(self.token)
    }

    /// Sends `req`; any non-2xx response becomes a readable message.
    fn send(&self, req: RequestBuilder) -> Result<Value, String> {
        let resp = req
            .send()
            .map_err(|e| format!("error: cannot reach {}: {e}", self.base))?;
        let status = resp.status();
        let text = resp
            .text()
            .map_err(|e| format!("error: reading response: {e}"))?;
        if status.is_success() {
            return serde_json::from_str(&text)
                .map_err(|e| format!("error: unexpected response from server: {e}"));
        }
        let Ok(err) = serde_json::from_str::<ApiError>(&text) else {
            return Err(format!("error: server answered {status}"));
        };
        let mut message = format!("error: {} ({})", err.message, err.code);
        let details = err
            .detail
            .and_then(|d| serde_json::from_value::<Vec<ValidationError>>(d).ok())
            .unwrap_or_default();
        for d in details {
            message.push_str(&format!("\n    {d}"));
        }
        Err(message)
    }
}
