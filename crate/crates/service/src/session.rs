//! Headless session: the single owner of playback, window states and the
//! gaze recording. The WebSocket server and offline replays drive the same
//! type.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use windb_core::io::{
    list_frames, load_frame, write_gaze_log, write_sidecar, GazeRecord, StateSidecar, ToolkitConfig,
};
use windb_core::pipeline::{step_dynamic_blur_batch, AuxWindowState, DisplayPoint, WinDbRenderer};
use windb_core::Frame;

use crate::SessionError;

pub const GAZE_LOG_NAME: &str = "gaze.csv";

#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub toolkit: ToolkitConfig,
    /// Directory receiving the gaze log and the per-frame sidecars.
    pub out_dir: PathBuf,
    pub user_id: u32,
}

/// Everything produced by one tick.
#[derive(Debug, Clone)]
pub struct TickOutput {
    pub index: u64,
    pub t_ms: u64,
    pub sidecar: StateSidecar,
    pub raster: Frame,
    /// Set on the clip's last frame; the gaze log has been written.
    pub ended: bool,
}

#[derive(Debug)]
pub struct Session {
    clip_id: String,
    frames: Vec<PathBuf>,
    renderer: WinDbRenderer,
    cfg: SessionConfig,
    states: Vec<AuxWindowState>,
    next_frame: u64,
    ticks: u64,
    playing: bool,
    finished: bool,
    /// Gaze points waiting for the frame they apply to.
    pending: BTreeMap<u64, Vec<DisplayPoint>>,
    recording: Vec<GazeRecord>,
    last_t_ms: HashMap<u32, u64>,
}

impl Session {
    /// Opens a clip directory. The session starts paused at frame 0 with
    /// every auxiliary window blurred.
    pub fn start(clip_dir: &Path, cfg: SessionConfig) -> Result<Self, SessionError> {
        cfg.toolkit.validate()?;
        let frames = list_frames(clip_dir)?;
        let first = load_frame(&frames[0])?;
        let renderer = WinDbRenderer::new(first.width(), first.height(), &cfg.toolkit.pipeline)?;
        std::fs::create_dir_all(&cfg.out_dir).map_err(|source| SessionError::Io {
            path: cfg.out_dir.clone(),
            source,
        })?;
        let clip_id = clip_dir.file_name().map_or_else(
            || clip_dir.display().to_string(),
            |n| n.to_string_lossy().into_owned(),
        );
        Ok(Self {
            clip_id,
            frames,
            states: renderer.layout().initial_states(),
            renderer,
            cfg,
            next_frame: 0,
            ticks: 0,
            playing: false,
            finished: false,
            pending: BTreeMap::new(),
            recording: Vec::new(),
            last_t_ms: HashMap::new(),
        })
    }

    pub fn clip_id(&self) -> &str {
        &self.clip_id
    }

    pub fn frame_count(&self) -> u64 {
        self.frames.len() as u64
    }

    pub fn fps(&self) -> u32 {
        self.cfg.toolkit.fps
    }

    pub fn renderer(&self) -> &WinDbRenderer {
        &self.renderer
    }

    pub fn states(&self) -> &[AuxWindowState] {
        &self.states
    }

    pub fn snapshot(&self) -> StateSidecar {
        StateSidecar::new(self.next_frame.saturating_sub(1), &self.states)
    }

    /// Index of the next frame to render.
    pub fn next_frame(&self) -> u64 {
        self.next_frame
    }

    pub fn is_playing(&self) -> bool {
        self.playing
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn recording(&self) -> &[GazeRecord] {
        &self.recording
    }

    /// Playback clock in seconds: one tick lasts `1 / fps`.
    pub fn clock_s(&self) -> f64 {
        self.ticks as f64 / f64::from(self.fps())
    }

    pub fn play(&mut self) {
        self.playing = !self.finished;
    }

    pub fn pause(&mut self) {
        self.playing = false;
    }

    fn frame_at(&self, t_ms: u64) -> u64 {
        t_ms * u64::from(self.fps()) / 1000
    }

    fn ensure_active(&self) -> Result<(), SessionError> {
        if self.finished {
            return Err(SessionError::Inactive);
        }
        Ok(())
    }

    /// Live gaze: applies to the frame showing at `t_ms`, or to the next
    /// frame if that one has already been rendered.
    pub fn ingest_gaze(
        &mut self,
        t_ms: u64,
        x_norm: f64,
        y_norm: f64,
    ) -> Result<u64, SessionError> {
        let target = self.frame_at(t_ms).max(self.next_frame);
        self.ingest(GazeRecord {
            user_id: self.cfg.user_id,
            frame_index: target,
            t_ms,
            x_norm,
            y_norm,
            valid: true,
        })
    }

    /// Recorded gaze: applies to `max(frame_index, frame at t_ms)`, which
    /// must not have been rendered yet. Invalid samples are recorded but
    /// never hit a window.
    pub fn ingest_record(&mut self, record: GazeRecord) -> Result<u64, SessionError> {
        let target = record.frame_index.max(self.frame_at(record.t_ms));
        if target < self.next_frame {
            return Err(SessionError::Late {
                target,
                next: self.next_frame,
            });
        }
        self.ingest(GazeRecord {
            frame_index: target,
            ..record
        })
    }

    fn ingest(&mut self, r: GazeRecord) -> Result<u64, SessionError> {
        self.ensure_active()?;
        for v in [r.x_norm, r.y_norm] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SessionError::OutOfRange(r.x_norm, r.y_norm));
            }
        }
        if let Some(&prev) = self.last_t_ms.get(&r.user_id) {
            if r.t_ms < prev {
                return Err(SessionError::TimeReversed { t_ms: r.t_ms, prev });
            }
        }
        self.last_t_ms.insert(r.user_id, r.t_ms);
        if r.valid {
            let p = DisplayPoint::from_normalized(
                r.x_norm,
                r.y_norm,
                self.renderer.width(),
                self.renderer.height(),
            );
            self.pending.entry(r.frame_index).or_default().push(p);
        }
        self.recording.push(r);
        Ok(r.frame_index)
    }

    /// Steps the window states with the gaze batched for the next frame,
    /// renders that frame and writes its sidecar. Returns `None` while
    /// paused or after the end.
    pub fn tick(&mut self) -> Result<Option<TickOutput>, SessionError> {
        if !self.playing || self.finished {
            return Ok(None);
        }
        self.advance().map(Some)
    }

    /// Fast-forwards through frames until `target` is the next frame to
    /// render, stepping the windows on every frame passed. Works while
    /// paused; never goes backwards.
    pub fn seek(&mut self, target: u64) -> Result<Vec<TickOutput>, SessionError> {
        self.ensure_active()?;
        if target < self.next_frame || target > self.frame_count() {
            return Err(SessionError::Seek {
                target,
                next: self.next_frame,
                frames: self.frame_count(),
            });
        }
        let mut out = Vec::new();
        while self.next_frame < target && !self.finished {
            out.push(self.advance()?);
        }
        Ok(out)
    }

    fn advance(&mut self) -> Result<TickOutput, SessionError> {
        let index = self.next_frame;
        let batch = self.pending.remove(&index).unwrap_or_default();
        let dt = 1.0 / f64::from(self.fps());
        self.states =
            step_dynamic_blur_batch(&self.states, &batch, dt, &self.cfg.toolkit.pipeline)?;
        let erp = load_frame(&self.frames[index as usize])?;
        let frame = self.renderer.render(
            &erp,
            &self.states,
            index,
            index * 1000 / u64::from(self.fps()),
        )?;
        let sidecar = StateSidecar::new(index, &self.states);
        write_sidecar(&self.cfg.out_dir, &sidecar)?;
        self.next_frame += 1;
        self.ticks += 1;
        let ended = self.next_frame == self.frame_count();
        if ended {
            self.finish()?;
        }
        Ok(TickOutput {
            index,
            t_ms: frame.timestamp_ms,
            sidecar,
            raster: frame.raster,
            ended,
        })
    }

    /// Stops playback and writes the gaze log. Idempotent.
    pub fn finish(&mut self) -> Result<PathBuf, SessionError> {
        let path = self.cfg.out_dir.join(GAZE_LOG_NAME);
        if !self.finished {
            self.finished = true;
            self.playing = false;
            write_gaze_log(&self.recording, &path)?;
        }
        Ok(path)
    }
}

/// Offline twin of a live session: feeds a recorded gaze log through a
/// headless session frame by frame and plays the clip to its end. Calls
/// `on_frame` for every rendered frame.
pub fn replay(
    clip_dir: &Path,
    records: &[GazeRecord],
    cfg: SessionConfig,
    mut on_frame: impl FnMut(&TickOutput) -> Result<(), SessionError>,
) -> Result<Session, SessionError> {
    let mut session = Session::start(clip_dir, cfg)?;
    let fps = u64::from(session.fps());
    let mut by_frame: BTreeMap<u64, Vec<GazeRecord>> = BTreeMap::new();
    for r in records {
        by_frame
            .entry(r.frame_index.max(r.t_ms * fps / 1000))
            .or_default()
            .push(*r);
    }
    for (frame, batch) in by_frame {
        if frame >= session.frame_count() {
            break;
        }
        for out in session.seek(frame)? {
            on_frame(&out)?;
        }
        for r in batch {
            session.ingest_record(r)?;
        }
    }
    let end = session.frame_count();
    for out in session.seek(end)? {
        on_frame(&out)?;
    }
    session.finish()?;
    Ok(session)
}
