//! Localhost WebSocket front end.
//!
//! Every client message goes to one actor thread that owns the [`Session`];
//! it replies to the sender on errors and broadcasts state and frame messages
//! to all viewers. Frames are ticked on the actor at the clip rate while
//! playing. The server stops once the session ends.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::mpsc as std_mpsc;
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use base64::Engine;
use futures_util::{SinkExt, StreamExt};
use tokio::net::TcpListener;
use tokio::sync::{broadcast, mpsc, oneshot};
use windb_core::io::encode_png;

use crate::session::{Session, TickOutput};
use crate::wire::{ClientMessage, ControlAction, ServerMessage};
use crate::SessionError;

pub const DEFAULT_PORT: u16 = 8390;

/// Idle wake-up interval of the actor while paused.
const IDLE_POLL: Duration = Duration::from_millis(50);
/// Grace period for viewers to receive the final messages.
const DRAIN_TIMEOUT: Duration = Duration::from_secs(2);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServeOptions {
    /// Start playing immediately instead of waiting for a play control.
    pub autoplay: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServeSummary {
    pub frames_rendered: u64,
    pub gaze_samples: usize,
    pub gaze_log: PathBuf,
}

enum Event {
    Connected(mpsc::UnboundedSender<String>),
    Text(String, mpsc::UnboundedSender<String>),
}

#[derive(Clone)]
struct AppState {
    events: std_mpsc::Sender<Event>,
    broadcast: broadcast::Sender<String>,
    /// Dropped by each connection when it ends.
    alive: mpsc::Sender<()>,
}

/// Binds `127.0.0.1:port`.
pub async fn bind(port: u16) -> Result<TcpListener, SessionError> {
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    TcpListener::bind(addr)
        .await
        .map_err(|source| SessionError::Bind {
            addr: addr.to_string(),
            source,
        })
}

/// Serves `session` on `listener` (WebSocket endpoint `/ws`) until the
/// session ends, then returns once viewers have drained.
pub async fn serve(
    session: Session,
    listener: TcpListener,
    opts: ServeOptions,
) -> Result<ServeSummary, SessionError> {
    let (events_tx, events_rx) = std_mpsc::channel();
    let (bcast_tx, _) = broadcast::channel(4096);
    let (alive_tx, mut alive_rx) = mpsc::channel(1);
    let (stop_tx, stop_rx) = oneshot::channel::<()>();

    let actor_bcast = bcast_tx.clone();
    let actor = tokio::task::spawn_blocking(move || {
        let result = run_actor(session, opts, &events_rx, &actor_bcast);
        drop(actor_bcast);
        let _ = stop_tx.send(());
        result
    });

    let app = Router::new()
        .route("/ws", get(upgrade))
        .with_state(AppState {
            events: events_tx,
            broadcast: bcast_tx,
            alive: alive_tx,
        });
    let server = axum::serve(listener, app).with_graceful_shutdown(async {
        let _ = stop_rx.await;
    });
    server.await.map_err(|source| SessionError::Io {
        path: PathBuf::from("<socket>"),
        source,
    })?;
    let _ = tokio::time::timeout(DRAIN_TIMEOUT, alive_rx.recv()).await;
    actor.await.expect("session actor panicked")
}

async fn upgrade(ws: WebSocketUpgrade, State(st): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| connection(socket, st))
}

async fn connection(socket: WebSocket, st: AppState) {
    let _alive = st.alive.clone();
    let (mut sink, mut stream) = socket.split();
    let (reply_tx, mut reply_rx) = mpsc::unbounded_channel::<String>();
    let mut bcast = st.broadcast.subscribe();
    if st.events.send(Event::Connected(reply_tx.clone())).is_err() {
        return;
    }
    let writer = async move {
        loop {
            let text = tokio::select! {
                m = reply_rx.recv() => match m {
                    Some(t) => t,
                    None => break,
                },
                m = bcast.recv() => match m {
                    Ok(t) => t,
                    Err(broadcast::error::RecvError::Lagged(n)) => {
                        ServerMessage::error(format!("viewer lagged, {n} messages dropped")).to_json()
                    }
                    Err(broadcast::error::RecvError::Closed) => break,
                },
            };
            if sink.send(Message::Text(text.into())).await.is_err() {
                return;
            }
        }
        let _ = sink.close().await;
    };
    let events = st.events.clone();
    let reader = async move {
        while let Some(Ok(msg)) = stream.next().await {
            match msg {
                Message::Text(t) => {
                    if events
                        .send(Event::Text(t.to_string(), reply_tx.clone()))
                        .is_err()
                    {
                        break;
                    }
                }
                Message::Close(_) => break,
                _ => {}
            }
        }
    };
    tokio::select! {
        _ = writer => {}
        _ = reader => {}
    }
}

fn broadcast_tick(tx: &broadcast::Sender<String>, out: &TickOutput) -> Result<(), SessionError> {
    let _ = tx.send(
        ServerMessage::AuxState {
            windows: out.sidecar.windows.clone(),
        }
        .to_json(),
    );
    let png = encode_png(&out.raster)?;
    let _ = tx.send(
        ServerMessage::Frame {
            index: out.index,
            t_ms: out.t_ms,
            png_b64: base64::engine::general_purpose::STANDARD.encode(png),
        }
        .to_json(),
    );
    if out.ended {
        broadcast_end(tx);
    }
    Ok(())
}

fn broadcast_end(tx: &broadcast::Sender<String>) {
    let _ = tx.send(
        ServerMessage::Control {
            action: ControlAction::End,
            value: None,
        }
        .to_json(),
    );
}

fn run_actor(
    mut session: Session,
    opts: ServeOptions,
    events: &std_mpsc::Receiver<Event>,
    tx: &broadcast::Sender<String>,
) -> Result<ServeSummary, SessionError> {
    let period = Duration::from_secs_f64(1.0 / f64::from(session.fps()));
    let mut rendered = 0u64;
    let mut deadline = Instant::now();
    if opts.autoplay {
        session.play();
    }
    let result = loop {
        if session.is_finished() {
            break Ok(());
        }
        let wait = if session.is_playing() {
            deadline.saturating_duration_since(Instant::now())
        } else {
            IDLE_POLL
        };
        match events.recv_timeout(wait) {
            Ok(Event::Connected(reply)) => {
                let snap = ServerMessage::AuxState {
                    windows: session.snapshot().windows,
                };
                let _ = reply.send(snap.to_json());
            }
            Ok(Event::Text(text, reply)) => match handle(&mut session, &text, tx, &mut rendered) {
                Ok(Some(Control::Play)) => deadline = Instant::now(),
                Ok(_) => {}
                Err(Failure::Reply(detail)) => {
                    let _ = reply.send(ServerMessage::error(detail).to_json());
                }
                Err(Failure::Fatal(e)) => break Err(e),
            },
            Err(std_mpsc::RecvTimeoutError::Timeout) => {}
            Err(std_mpsc::RecvTimeoutError::Disconnected) => break Ok(()),
        }
        if session.is_playing() && Instant::now() >= deadline {
            match session
                .tick()
                .and_then(|o| o.map(|o| broadcast_tick(tx, &o)).transpose())
            {
                Ok(Some(())) => rendered += 1,
                Ok(None) => {}
                Err(e) => break Err(e),
            }
            deadline += period;
        }
    };
    if let Err(e) = &result {
        let _ = tx.send(ServerMessage::error(format!("session aborted: {e}")).to_json());
    }
    let gaze_log = session.finish()?;
    result.map(|()| ServeSummary {
        frames_rendered: rendered,
        gaze_samples: session.recording().len(),
        gaze_log,
    })
}

enum Control {
    Play,
}

enum Failure {
    /// Reported to the sender; the session continues.
    Reply(String),
    /// Aborts the session.
    Fatal(SessionError),
}

fn handle(
    session: &mut Session,
    text: &str,
    tx: &broadcast::Sender<String>,
    rendered: &mut u64,
) -> Result<Option<Control>, Failure> {
    let msg = ClientMessage::parse(text).map_err(Failure::Reply)?;
    match msg {
        ClientMessage::Gaze {
            t_ms,
            x_norm,
            y_norm,
        } => {
            session
                .ingest_gaze(t_ms, x_norm, y_norm)
                .map_err(|e| Failure::Reply(e.to_string()))?;
        }
        ClientMessage::Control { action, value } => match action {
            ControlAction::Play => {
                session.play();
                return Ok(Some(Control::Play));
            }
            ControlAction::Pause => session.pause(),
            ControlAction::Seek => {
                let target = value.and_then(|v| u64::try_from(v).ok()).ok_or_else(|| {
                    Failure::Reply("seek needs a non-negative frame value".into())
                })?;
                let outs = session.seek(target).map_err(|e| match e {
                    SessionError::Seek { .. } | SessionError::Inactive => {
                        Failure::Reply(e.to_string())
                    }
                    other => Failure::Fatal(other),
                })?;
                for o in &outs {
                    broadcast_tick(tx, o).map_err(Failure::Fatal)?;
                    *rendered += 1;
                }
            }
            ControlAction::End => {
                session.finish().map_err(Failure::Fatal)?;
                broadcast_end(tx);
            }
        },
    }
    Ok(None)
}
