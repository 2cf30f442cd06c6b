//! Runs the `cbt` binary as a child process and talks to it over HTTP.

#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, ExitStatus, Stdio};
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::Method;
use serde_json::{json, Value};

pub const BIN: &str = env!("CARGO_BIN_EXE_cbt");
pub const ADMIN: &str = "admin";
pub const ADMIN_PASSWORD: &str = "admin-password";

/// Flags that make password hashing cheap enough for tests.
pub const FAST_HASH: [&str; 6] = [
    "--argon2-memory-kib",
    "8",
    "--argon2-iterations",
    "1",
    "--argon2-parallelism",
    "1",
];

pub fn cbt() -> Command {
    let mut cmd = Command::new(BIN);
    for (key, _) in std::env::vars() {
        if key.starts_with("CBT_") {
            cmd.env_remove(key);
        }
    }
    cmd
}

pub struct ServerProcess {
    child: Child,
    pub url: String,
    log: Arc<Mutex<String>>,
}

impl ServerProcess {
    /// Starts `cbt serve` on a free port with the bootstrap manager
    /// credentials; `Err` carries the log if it exits before listening.
    pub fn spawn(data_dir: &Path, extra: &[&str]) -> Result<ServerProcess, String> {
        let mut cmd = cbt();
        cmd.args(["serve", "--port", "0", "--data-dir"])
            .arg(data_dir)
            .args([
                "--bootstrap-username",
                ADMIN,
                "--bootstrap-password",
                ADMIN_PASSWORD,
            ])
            .args(FAST_HASH)
            .args(extra);
        ServerProcess::spawn_command(cmd)
    }

    pub fn spawn_command(mut cmd: Command) -> Result<ServerProcess, String> {
        let mut child = cmd
            .env("RUST_LOG", "info")
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| e.to_string())?;
        let stderr = child.stderr.take().expect("piped");
        let log = Arc::new(Mutex::new(String::new()));
        let (tx, rx) = mpsc::channel();
        let sink = log.clone();
        std::thread::spawn(move || {
            for line in BufReader::new(stderr).lines().map_while(Result::ok) {
                if let Some(at) = line.find("listening on http://") {
                    let _ = tx.send(line[at + "listening on ".len()..].trim().to_string());
                }
                let mut log = sink.lock().unwrap();
                log.push_str(&line);
                log.push('\n');
            }
        });
        match rx.recv_timeout(Duration::from_secs(30)) {
            Ok(url) => Ok(ServerProcess { child, url, log }),
            Err(_) => {
                let _ = child.kill();
                let _ = child.wait();
                std::thread::sleep(Duration::from_millis(50));
                let log = log.lock().unwrap().clone();
                Err(log)
            }
        }
    }

    pub fn pid(&self) -> u32 {
        self.child.id()
    }

    pub fn log(&self) -> String {
        self.log.lock().unwrap().clone()
    }

    /// Sends SIGTERM and waits for the process to exit.
    pub fn terminate(mut self) -> (ExitStatus, String) {
        let sent = Command::new("kill")
            .args(["-TERM", &self.child.id().to_string()])
            .status()
            .expect("run kill");
        assert!(sent.success());
        let status = self.child.wait().expect("wait for server");
        std::thread::sleep(Duration::from_millis(50));
        (status, self.log())
    }

    /// SIGKILL: no chance to flush or clean up.
    pub fn kill9(mut self) {
        self.child.kill().expect("kill server");
        self.child.wait().expect("wait for server");
    }
}

impl Drop for ServerProcess {
    fn drop(&mut self) {
        if let Ok(None) = self.child.try_wait() {
            let _ = self.child.kill();
            let _ = self.child.wait();
        }
    }
}

/// Minimal JSON client for the API.
pub struct Api {
    pub client: Client,
    pub base: String,
}

impl Api {
    pub fn new(base: &str) -> Api {
        Api {
            client: Client::new(),
            base: base.to_string(),
        }
    }

    pub fn call(
        &self,
        method: Method,
        path: &str,
        token: Option<&str>,
        body: Option<Value>,
    ) -> (u16, String) {
        let mut req = self.client.request(method, format!("{}{path}", self.base));
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = body {
            req = req.json(&b);
        }
        let resp = req.send().expect("server reachable");
        let status = resp.status().as_u16();
        (status, resp.text().expect("response body"))
    }

    pub fn json(
        &self,
        method: Method,
        path: &str,
        token: Option<&str>,
        body: Option<Value>,
    ) -> (u16, Value) {
        let (status, text) = self.call(method, path, token, body);
        (status, serde_json::from_str(&text).unwrap_or(Value::Null))
    }

    pub fn login(&self, username: &str, password: &str) -> Result<String, (u16, Value)> {
        let (status, body) = self.json(
            Method::POST,
            "/api/login",
            None,
            Some(json!({"username": username, "password": password})),
        );
        match (status, body["token"].as_str()) {
            (200, Some(t)) => Ok(t.to_string()),
            _ => Err((status, body)),
        }
    }
}
