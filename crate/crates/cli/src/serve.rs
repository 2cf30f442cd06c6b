use std::io::IsTerminal;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;

use cbt_core::store::{Store, User};
use cbt_server::{http, ExamService, PasswordParams, ServiceConfig, SystemClock};
use clap::Args;
use tracing_subscriber::EnvFilter;

#[derive(Args)]
pub struct ServeArgs {
    /// TCP port to listen on; 0 picks a free one.
    #[arg(long, env = "CBT_PORT", default_value_t = 8080)]
    port: u16,
    /// Address to bind.
    #[arg(long, env = "CBT_BIND", default_value = "127.0.0.1")]
    bind: IpAddr,
    /// Directory holding the store; created if missing.
    #[arg(long, env = "CBT_DATA_DIR", default_value = "cbt-data")]
    data_dir: PathBuf,
    /// Username of the manager account created on first run.
    #[arg(long, env = "CBT_BOOTSTRAP_USERNAME", default_value = "admin")]
    bootstrap_username: String,
    /// Password of the manager account created on first run. Required
    /// while the store has no users; ignored afterwards.
    #[arg(long, env = "CBT_BOOTSTRAP_PASSWORD", hide_env_values = true)]
    bootstrap_password: Option<String>,
    /// Lifetime of a login, in minutes.
    #[arg(long, env = "CBT_TOKEN_TTL_MINUTES", default_value_t = 60)]
    token_ttl_minutes: u32,
    /// Argon2id memory cost for new password hashes, in KiB.
    #[arg(long, env = "CBT_ARGON2_MEMORY_KIB", default_value_t = PasswordParams::default().memory_kib)]
    argon2_memory_kib: u32,
    /// Argon2id iteration count for new password hashes.
    #[arg(long, env = "CBT_ARGON2_ITERATIONS", default_value_t = PasswordParams::default().iterations)]
    argon2_iterations: u32,
    /// Argon2id lane count for new password hashes.
    #[arg(long, env = "CBT_ARGON2_PARALLELISM", default_value_t = PasswordParams::default().parallelism)]
    argon2_parallelism: u32,
}

pub fn run(args: ServeArgs) -> Result<(), String> {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .init();

    let store = Store::open(&args.data_dir).map_err(|e| {
        format!(
            "error: cannot open data directory {}: {e}",
            args.data_dir.display()
        )
    })?;
    let config = ServiceConfig {
        token_ttl: chrono::Duration::minutes(args.token_ttl_minutes.into()),
        passwords: PasswordParams {
            memory_kib: args.argon2_memory_kib,
            iterations: args.argon2_iterations,
            parallelism: args.argon2_parallelism,
        },
        ..ServiceConfig::default()
    };
    let service = ExamService::new(Arc::new(store), Arc::new(SystemClock), config)
        .map_err(|e| format!("error: invalid argon2 parameters: {e}"))?;
    bootstrap(&service, &args)?;

    let runtime =
        tokio::runtime::Runtime::new().map_err(|e| format!("error: cannot start runtime: {e}"))?;
    runtime.block_on(async {
        let addr = SocketAddr::new(args.bind, args.port);
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| format!("error: cannot listen on {addr}: {e}"))?;
        let local = listener.local_addr().map_err(|e| format!("error: {e}"))?;
        tracing::info!("listening on http://{local}");
        http::serve(listener, Arc::new(service), shutdown_signal())
            .await
            .map_err(|e| format!("error: server failed: {e}"))
    })?;
    tracing::info!("shut down cleanly");
    Ok(())
}

fn bootstrap(service: &ExamService, args: &ServeArgs) -> Result<(), String> {
    match &args.bootstrap_password {
        Some(password) => match service.bootstrap_manager(&args.bootstrap_username, password) {
            Ok(Some(user)) => {
                tracing::info!(username = %user.username, "created bootstrap manager account");
                Ok(())
            }
            Ok(None) => Ok(()),
            Err(e) => Err(format!("error: cannot create bootstrap manager: {}", e.message)),
        },
        None if service.store().list::<User>(|_| true).is_empty() => Err(
            "error: the store has no users; pass --bootstrap-password (or set CBT_BOOTSTRAP_PASSWORD) \
             to create the first manager account"
                .to_string(),
        ),
        None => Ok(()),
    }
}

async fn shutdown_signal() {
    let interrupt = async {
        if let Err(e) = tokio::signal::ctrl_c().await {
            tracing::error!(error = %e, "cannot listen for interrupt");
            std::future::pending::<()>().await;
        }
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(e) => {
                tracing::error!(error = %e, "cannot listen for SIGTERM");
                std::future::pending::<()>().await;
            }
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        () = interrupt => {}
        () = terminate => {}
    }
    tracing::info!("shutdown requested; draining requests");
}
