//! On-disk formats: gaze logs, fixation maps, configuration files, frame
//! directories and per-frame state sidecars.

pub mod config;
pub mod frames;
pub mod gaze_log;
pub mod map_pnm;
pub mod sidecar;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{parse_config, read_config, ToolkitConfig};
pub use frames::{encode_png, frame_file_name, list_frames, load_frame, write_frame};
pub use gaze_log::{
    parse_gaze_log, read_gaze_log, render_gaze_log, write_gaze_log, DisplayMapping, GazeRecord,
    GAZE_LOG_HEADER,
};
pub use map_pnm::{decode_map, encode_map, read_map, read_map_sized, write_map};
pub use sidecar::{
    read_sidecar, sidecar_file_name, write_sidecar, StateSidecar, WindowStateRecord,
};

#[derive(Debug, Error)]
pub enum IoFormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {detail}")]
    Parse { line: u64, detail: String },
    #[error("line {line}: {detail}")]
    Validation { line: u64, detail: String },
    #[error("byte {offset}: {detail}")]
    Format { offset: usize, detail: String },
    #[error("map is {actual_w}x{actual_h}, expected {expected_w}x{expected_h}")]
    Dimension {
        expected_w: u32,
        expected_h: u32,
        actual_w: u32,
        actual_h: u32,
    },
    #[error("{0}: no numbered frames")]
    MissingFrames(PathBuf),
    #[error("{path}: {detail}")]
    Image { path: PathBuf, detail: String },
    #[error("{0}")]
    Invalid(String),
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> IoFormatError {
    let path = path.into();
    move |source| IoFormatError::Io { path, source }
}
