//! `cbt`: runs the exam server, renders markup files, and moves exams in
//! and out of a running server as exam files.

mod remote;
mod render;
mod serve;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "cbt",
    version,
    about = "LaTeX-native computer-based testing server"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP API until interrupted.
    Serve(serve::ServeArgs),
    /// Render a markup file to HTML on stdout.
    Render(render::RenderArgs),
    /// Create an exam on a running server from an exam file.
    Import(remote::ImportArgs),
    /// Print an exam held by a running server as an exam file.
    Export(remote::ExportArgs),
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Serve(args) => serve::run(args),
        Command::Render(args) => render::run(args),
        Command::Import(args) => remote::import(args),
        Command::Export(args) => remote::export(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("{message}");
            ExitCode::FAILURE
        }
    }
}
