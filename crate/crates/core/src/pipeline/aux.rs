//! Auxiliary polar windows and the blurred / clear / re-blurring state
//! machine that drives their blur level.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::geometry::{gnomonic_sample, sphere_to_erp, PixelRect, SphericalCoord, SubWindowSpec};
use crate::pipeline::{check_dims, PipelineConfig, PipelineError};
use crate::raster::{quantize, BilinearTap, Frame, GaussianKernel, LinearImage};

/// Slack for accumulated floating-point time steps.
const TIME_EPS: f64 = 1e-9;

/// A point in display (composed frame) pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplayPoint {
    pub x: f64,
    pub y: f64,
}

impl DisplayPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_normalized(x_norm: f64, y_norm: f64, width: u32, height: u32) -> Self {
        Self {
            x: x_norm * f64::from(width),
            y: y_norm * f64::from(height),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxWindow {
    pub id: usize,
    pub spec: SubWindowSpec,
    pub display_rect: PixelRect,
}

/// Placement of the auxiliary windows on the display.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxLayout {
    windows: Vec<AuxWindow>,
}

impl AuxLayout {
    pub fn new(windows: Vec<AuxWindow>) -> Result<Self, PipelineError> {
        for (i, a) in windows.iter().enumerate() {
            for (j, b) in windows.iter().enumerate().skip(i + 1) {
                if a.display_rect.overlaps(&b.display_rect) {
                    return Err(PipelineError::OverlappingAuxRects(i, j));
                }
            }
        }
        Ok(Self { windows })
    }

    /// Default layout: `aux_count / 2` windows per pole. Each pole's windows
    /// split the full longitude circle evenly and touch the pole; their
    /// display rects form a band of height `h / 6` at the top (north) and
    /// bottom (south) of the display, each rect above the longitudes it shows.
    pub fn standard(width: u32, height: u32, cfg: &PipelineConfig) -> Result<Self, PipelineError> {
        cfg.validate()?;
        let per_band = cfg.aux_count / 2;
        if per_band == 0 {
            return Ok(Self {
                windows: Vec::new(),
            });
        }
        if width < per_band || height < 6 {
            return Err(PipelineError::Config(format!(
                "{width}x{height} display too small for {} auxiliary windows",
                cfg.aux_count
            )));
        }
        let half_v = (0.5 * cfg.aux_vertical_deg).to_radians();
        let half_h = (0.5 * cfg.aux_horizontal_deg).to_radians();
        let band_h = height / 6;
        let mut windows = Vec::with_capacity(cfg.aux_count as usize);
        for (band, sign) in [(0u32, 1.0f64), (1, -1.0)] {
            let lat = sign * (FRAC_PI_2 - half_v);
            let y = if band == 0 { 0 } else { height - band_h };
            for k in 0..per_band {
                let lon = -PI + (f64::from(k) + 0.5) * TAU / f64::from(per_band);
                let x0 = k * width / per_band;
                let x1 = (k + 1) * width / per_band;
                let spec = SubWindowSpec::new(SphericalCoord::new(lat, lon)?, half_h, half_v)?;
                windows.push(AuxWindow {
                    id: windows.len(),
                    spec,
                    display_rect: PixelRect::new(x0, y, x1 - x0, band_h),
                });
            }
        }
        Self::new(windows)
    }

    pub fn windows(&self) -> &[AuxWindow] {
        &self.windows
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    /// Every window starts blurred.
    pub fn initial_states(&self) -> Vec<AuxWindowState> {
        self.windows
            .iter()
            .copied()
            .map(AuxWindowState::new)
            .collect()
    }

    /// Window whose display rect contains `p`.
    pub fn hit(&self, p: DisplayPoint) -> Option<&AuxWindow> {
        self.windows
            .iter()
            .find(|w| w.display_rect.contains(p.x, p.y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlurState {
    #[serde(rename = "B")]
    Blurred,
    #[serde(rename = "C")]
    Clear,
    #[serde(rename = "R")]
    Reblurring,
}

impl BlurState {
    pub fn letter(self) -> char {
        match self {
            BlurState::Blurred => 'B',
            BlurState::Clear => 'C',
            BlurState::Reblurring => 'R',
        }
    }
}

/// Per-window state. `Blurred` has alpha 1, `Clear` alpha 0 and
/// `Reblurring` an alpha strictly between, rising linearly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxWindowState {
    window: AuxWindow,
    state: BlurState,
    no_gaze_elapsed_s: f64,
    reblur_alpha: f64,
}

impl AuxWindowState {
    pub fn new(window: AuxWindow) -> Self {
        Self {
            window,
            state: BlurState::Blurred,
            no_gaze_elapsed_s: 0.0,
            reblur_alpha: 1.0,
        }
    }

    /// Same window forced into the clear state, as shown before dynamic
    /// blurring is enabled.
    pub fn held_clear(window: AuxWindow) -> Self {
        Self {
            window,
            state: BlurState::Clear,
            no_gaze_elapsed_s: 0.0,
            reblur_alpha: 0.0,
        }
    }

    pub fn id(&self) -> usize {
        self.window.id
    }

    pub fn window(&self) -> &AuxWindow {
        &self.window
    }

    pub fn state(&self) -> BlurState {
        self.state
    }

    pub fn no_gaze_elapsed_s(&self) -> f64 {
        self.no_gaze_elapsed_s
    }

    pub fn reblur_alpha(&self) -> f64 {
        self.reblur_alpha
    }

    /// One time step. A hit clears the window from any state. Otherwise a
    /// clear window starts re-blurring once `clear_hold_s` has passed without
    /// gaze (the step that crosses the hold time is the first ramp step), and
    /// a re-blurring window gains `dt / reblur_duration_s` of alpha per step
    /// until it is fully blurred again.
    pub fn advance(&mut self, hit: bool, dt_s: f64, cfg: &PipelineConfig) {
        if hit {
            self.state = BlurState::Clear;
            self.reblur_alpha = 0.0;
            self.no_gaze_elapsed_s = 0.0;
            return;
        }
        match self.state {
            BlurState::Blurred => {}
            BlurState::Clear => {
                self.no_gaze_elapsed_s += dt_s;
                if self.no_gaze_elapsed_s >= cfg.clear_hold_s - TIME_EPS {
                    self.state = BlurState::Reblurring;
                    self.ramp(dt_s, cfg);
                }
            }
            BlurState::Reblurring => {
                self.no_gaze_elapsed_s += dt_s;
                self.ramp(dt_s, cfg);
            }
        }
    }

    fn ramp(&mut self, dt_s: f64, cfg: &PipelineConfig) {
        self.reblur_alpha = (self.reblur_alpha + dt_s / cfg.reblur_duration_s).min(1.0);
        if self.reblur_alpha >= 1.0 - TIME_EPS {
            self.reblur_alpha = 1.0;
            self.state = BlurState::Blurred;
            self.no_gaze_elapsed_s = 0.0;
        }
    }
}

/// Advances every window by `dt_s`; a window is hit when `gaze` lies inside
/// its display rect.
pub fn step_dynamic_blur(
    states: &[AuxWindowState],
    gaze: Option<DisplayPoint>,
    dt_s: f64,
    cfg: &PipelineConfig,
) -> Result<Vec<AuxWindowState>, PipelineError> {
    step_dynamic_blur_batch(states, gaze.as_slice(), dt_s, cfg)
}

/// Like [`step_dynamic_blur`] for all gaze points received during one step:
/// a window is hit when any of them lies inside it.
pub fn step_dynamic_blur_batch(
    states: &[AuxWindowState],
    gaze: &[DisplayPoint],
    dt_s: f64,
    cfg: &PipelineConfig,
) -> Result<Vec<AuxWindowState>, PipelineError> {
    if !(dt_s.is_finite() && dt_s > 0.0) {
        return Err(PipelineError::TimeStep(dt_s));
    }
    Ok(states
        .iter()
        .map(|s| {
            let mut next = *s;
            let rect = s.window.display_rect;
            let hit = gaze.iter().any(|g| rect.contains(g.x, g.y));
            next.advance(hit, dt_s, cfg);
            next
        })
        .collect())
}

/// Precomputed sample positions for each auxiliary window's display rect.
#[derive(Debug, Clone)]
pub struct AuxPlan {
    width: u32,
    height: u32,
    windows: Vec<(AuxWindow, Vec<BilinearTap>)>,
    kernel: GaussianKernel,
}

impl AuxPlan {
    pub fn new(
        windows: &[AuxWindow],
        width: u32,
        height: u32,
        cfg: &PipelineConfig,
    ) -> Result<Self, PipelineError> {
        let layout = AuxLayout::new(windows.to_vec())?;
        let mut planned = Vec::with_capacity(layout.windows.len());
        for w in &layout.windows {
            let r = w.display_rect;
            if r.x + r.width > width || r.y + r.height > height || r.width == 0 || r.height == 0 {
                return Err(PipelineError::Config(format!(
                    "auxiliary window {} rect {:?} outside the {width}x{height} display",
                    w.id, r
                )));
            }
            let mut sources = Vec::with_capacity(r.area() as usize);
            for y in 0..r.height {
                for x in 0..r.width {
                    let u = (f64::from(x) + 0.5) / f64::from(r.width);
                    let v = (f64::from(y) + 0.5) / f64::from(r.height);
                    let s = gnomonic_sample(&w.spec, u, v)?;
                    sources.push(BilinearTap::new(
                        sphere_to_erp(s, width, height),
                        width,
                        height,
                    ));
                }
            }
            planned.push((*w, sources));
        }
        Ok(Self {
            width,
            height,
            windows: planned,
            kernel: cfg.kernel()?,
        })
    }

    pub fn windows(&self) -> impl Iterator<Item = &AuxWindow> {
        self.windows.iter().map(|(w, _)| w)
    }

    /// Clear gnomonic render of window `index`, sized to its display rect.
    pub fn render_clear(&self, index: usize, source_erp: &Frame) -> Frame {
        let (w, sources) = &self.windows[index];
        let r = w.display_rect;
        let mut out = Frame::new(r.width, r.height);
        let raw = source_erp.as_raw();
        for (dst, tap) in out.pixels_mut().zip(sources) {
            dst.0 = quantize(tap.sample(raw).map(|c| c / 255.0));
        }
        out
    }

    /// Gaussian-blurred copy of a clear render, unquantised.
    pub fn blur_render(&self, clear: &Frame) -> LinearImage {
        self.kernel.blur(&LinearImage::from_frame(clear))
    }

    pub fn compose(
        &self,
        base: &Frame,
        states: &[AuxWindowState],
        source_erp: &Frame,
    ) -> Result<Frame, PipelineError> {
        check_dims(base, self.width, self.height)?;
        check_dims(source_erp, self.width, self.height)?;
        let mut out = base.clone();
        for st in states {
            let index = self
                .windows
                .iter()
                .position(|(w, _)| w.id == st.id() && w.display_rect == st.window.display_rect)
                .ok_or_else(|| {
                    PipelineError::Config(format!(
                        "no planned auxiliary window with id {}",
                        st.id()
                    ))
                })?;
            let r = st.window.display_rect;
            let clear = self.render_clear(index, source_erp);
            let alpha = st.reblur_alpha;
            if alpha == 0.0 {
                for (x, y, p) in clear.enumerate_pixels() {
                    out.put_pixel(r.x + x, r.y + y, *p);
                }
                continue;
            }
            let blurred = self.blur_render(&clear);
            for (x, y, p) in clear.enumerate_pixels() {
                let b = blurred.get(x, y);
                let c = p.0.map(|v| f64::from(v) / 255.0);
                let mixed = [
                    alpha * b[0] + (1.0 - alpha) * c[0],
                    alpha * b[1] + (1.0 - alpha) * c[1],
                    alpha * b[2] + (1.0 - alpha) * c[2],
                ];
                out.get_pixel_mut(r.x + x, r.y + y).0 = quantize(mixed);
            }
        }
        Ok(out)
    }
}

/// Draws each window into its display rect as
/// `alpha * blurred + (1 - alpha) * clear`.
pub fn compose_aux_overlays(
    base: &Frame,
    states: &[AuxWindowState],
    source_erp: &Frame,
    cfg: &PipelineConfig,
) -> Result<Frame, PipelineError> {
    let windows: Vec<AuxWindow> = states.iter().map(|s| s.window).collect();
    AuxPlan::new(&windows, base.width(), base.height(), cfg)?.compose(base, states, source_erp)
}
