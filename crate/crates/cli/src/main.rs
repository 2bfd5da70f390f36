//! `windb`: offline rendering, live and simulated sessions, and analytics.
//!
//! Exit codes: 0 on success, 1 for bad input (flags, files, formats,
//! configuration), 2 for internal failures.

mod analyze;
mod live;
mod render;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "windb",
    version,
    about = "WinDB panoramic display synthesis and fixation analytics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render one pipeline stage for every frame of a clip.
    Render(render::RenderArgs),
    /// Run a live session behind a localhost WebSocket.
    Serve(live::ServeArgs),
    /// Replay a recorded gaze log through a headless session.
    Simulate(live::SimulateArgs),
    /// Fixation analytics.
    #[command(subcommand)]
    Analyze(analyze::AnalyzeCommand),
}

/// Options shared by every subcommand that reads a config file.
#[derive(Debug, clap::Args)]
struct ConfigArg {
    /// `key = value` configuration file; absent keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    let result = std::panic::catch_unwind(|| match cli.command {
        Command::Render(a) => render::run(a),
        Command::Serve(a) => live::serve(a),
        Command::Simulate(a) => live::simulate(a),
        Command::Analyze(a) => analyze::run(a),
    });
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {}", util::describe(&e));
            ExitCode::from(util::exit_code(&e))
        }
        Err(_) => ExitCode::from(2),
    }
}
