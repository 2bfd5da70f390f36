//! Live WinDB sessions: a headless [`Session`] that owns playback, window
//! states and the gaze recording, and a localhost WebSocket server that
//! streams it to viewers.

pub mod server;
pub mod session;
pub mod wire;

use std::path::{Path, PathBuf};

use thiserror::Error;
use windb_core::io::IoFormatError;
use windb_core::pipeline::PipelineError;

pub use server::{bind, serve, ServeOptions, ServeSummary, DEFAULT_PORT};
pub use session::{replay, Session, SessionConfig, TickOutput, GAZE_LOG_NAME};
pub use wire::{ClientMessage, ControlAction, ServerMessage};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("a session is already active")]
    Busy,
    #[error("no active session")]
    Inactive,
    #[error("gaze point ({0}, {1}) outside [0, 1]")]
    OutOfRange(f64, f64),
    #[error("gaze t_ms {t_ms} is earlier than the previous sample at {prev}")]
    TimeReversed { t_ms: u64, prev: u64 },
    #[error("gaze for frame {target} arrived after frame {next} was due")]
    Late { target: u64, next: u64 },
    #[error("cannot seek to frame {target}: next frame is {next} of {frames}")]
    Seek { target: u64, next: u64, frames: u64 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("could not bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Format(#[from] IoFormatError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// Holds at most one session at a time.
#[derive(Debug, Default)]
pub struct SessionHost {
    active: Option<Session>,
}

impl SessionHost {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts a session unless one is still running.
    pub fn start(
        &mut self,
        clip_dir: &Path,
        cfg: SessionConfig,
    ) -> Result<&mut Session, SessionError> {
        if self.active.as_ref().is_some_and(|s| !s.is_finished()) {
            return Err(SessionError::Busy);
        }
        Ok(self.active.insert(Session::start(clip_dir, cfg)?))
    }

    pub fn session(&mut self) -> Option<&mut Session> {
        self.active.as_mut()
    }

    /// Hands the session over, leaving the host free.
    pub fn take(&mut self) -> Option<Session> {
        self.active.take()
    }
}
