//! JSON messages exchanged with viewers, one object per WebSocket text
//! message.
//!
//! Server to client:
//! ```text
//! {"type":"frame","index":3,"t_ms":50,"png_b64":"iVBORw0..."}
//! {"type":"aux_state","windows":[{"id":0,"state":"B","alpha":1.0}]}
//! {"type":"control","action":"end"}
//! {"type":"error","detail":"..."}
//! ```
//! Client to server:
//! ```text
//! {"type":"gaze","t_ms":1234,"x_norm":0.41,"y_norm":0.08}
//! {"type":"control","action":"play"|"pause"|"seek"|"end","value":0}
//! ```

use serde::{Deserialize, Serialize};
use windb_core::io::WindowStateRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlAction {
    Play,
    Pause,
    Seek,
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Frame {
        index: u64,
        t_ms: u64,
        png_b64: String,
    },
    AuxState {
        windows: Vec<WindowStateRecord>,
    },
    Control {
        action: ControlAction,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        value: Option<i64>,
    },
    Error {
        detail: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    Gaze {
        t_ms: u64,
        x_norm: f64,
        y_norm: f64,
    },
    Control {
        action: ControlAction,
        #[serde(default)]
        value: Option<i64>,
    },
}

impl ServerMessage {
    pub fn error(detail: impl Into<String>) -> Self {
        ServerMessage::Error {
            detail: detail.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialise")
    }
}

impl ClientMessage {
    /// Parses one client message. The error text is suitable for an
    /// `error` reply.
    pub fn parse(text: &str) -> Result<Self, String> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| format!("malformed JSON: {e}"))?;
        let kind = value
            .get("type")
            .and_then(|t| t.as_str())
            .ok_or_else(|| "message needs a string \"type\" field".to_string())?
            .to_string();
        if !matches!(kind.as_str(), "gaze" | "control") {
            return Err(format!("unknown message type '{kind}'"));
        }
        serde_json::from_value(value).map_err(|e| format!("bad {kind} message: {e}"))
    }
}
