//! Per-frame window state sidecars.
//!
//! ```text
//! {"frame_index":12,"windows":[{"id":0,"state":"C","alpha":0.0},...]}
//! ```
//!
//! `alpha` is the blur weight of the overlay: 1 when blurred, 0 when clear.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::io::{io_err, IoFormatError};
use crate::pipeline::{AuxWindowState, BlurState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowStateRecord {
    pub id: usize,
    pub state: BlurState,
    pub alpha: f64,
}

impl From<&AuxWindowState> for WindowStateRecord {
    fn from(s: &AuxWindowState) -> Self {
        Self {
            id: s.id(),
            state: s.state(),
            alpha: s.reblur_alpha(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSidecar {
    pub frame_index: u64,
    pub windows: Vec<WindowStateRecord>,
}

impl StateSidecar {
    pub fn new(frame_index: u64, states: &[AuxWindowState]) -> Self {
        Self {
            frame_index,
            windows: states.iter().map(WindowStateRecord::from).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sidecar serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, IoFormatError> {
        serde_json::from_str(text).map_err(|e| IoFormatError::Parse {
            line: e.line() as u64,
            detail: e.to_string(),
        })
    }
}

pub fn sidecar_file_name(index: u64) -> String {
    format!("frame_{index:06}.json")
}

pub fn write_sidecar(dir: &Path, sidecar: &StateSidecar) -> Result<PathBuf, IoFormatError> {
    let path = dir.join(sidecar_file_name(sidecar.frame_index));
    let mut text = sidecar.to_json();
    text.push('\n');
    std::fs::write(&path, text).map_err(io_err(&path))?;
    Ok(path)
}

pub fn read_sidecar(path: &Path) -> Result<StateSidecar, IoFormatError> {
    StateSidecar::from_json(&std::fs::read_to_string(path).map_err(io_err(path))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{AuxLayout, PipelineConfig};

    #[test]
    fn fresh_states_serialise_blurred() {
        let layout = AuxLayout::standard(768, 384, &PipelineConfig::default()).unwrap();
        let s = StateSidecar::new(0, &layout.initial_states());
        let json = s.to_json();
        assert!(json.starts_with(r#"{"frame_index":0,"windows":[{"id":0,"state":"B","alpha":1.0}"#));
        assert_eq!(StateSidecar::from_json(&json).unwrap(), s);
    }

    #[test]
    fn bad_state_letter() {
        let bad = r#"{"frame_index":0,"windows":[{"id":0,"state":"X","alpha":1.0}]}"#;
        assert!(StateSidecar::from_json(bad).is_err());
    }
}
