//! WinDB display synthesis.
//!
//! Stage order for one frame: gnomonic patch re-projection, discriminative
//! vertical blur, mesh screen, then the auxiliary polar windows whose blur
//! level is driven by the gaze state machine in [`aux`].

pub mod aux;
pub mod dvb;
pub mod mesh;
pub mod projection;
pub mod render;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::raster::BlurError;

pub use aux::{
    compose_aux_overlays, step_dynamic_blur, step_dynamic_blur_batch, AuxLayout, AuxWindow,
    AuxWindowState, BlurState, DisplayPoint,
};
pub use dvb::{discriminative_vertical_blur, DvbPlan};
pub use mesh::{apply_mesh, MeshMask};
pub use projection::{project_distortion_free, ProjectionPlan};
pub use render::{render_windb_frame, Stage, WinDbFrame, WinDbRenderer};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("frame is {actual_w}x{actual_h}, expected {expected_w}x{expected_h}")]
    DimensionMismatch {
        expected_w: u32,
        expected_h: u32,
        actual_w: u32,
        actual_h: u32,
    },
    #[error("auxiliary display rects {0} and {1} overlap")]
    OverlappingAuxRects(usize, usize),
    #[error("invalid pipeline configuration: {0}")]
    Config(String),
    #[error("time step must be positive, got {0}")]
    TimeStep(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Blur(#[from] BlurError),
}

pub(crate) fn check_dims(frame: &crate::Frame, w: u32, h: u32) -> Result<(), PipelineError> {
    if frame.width() != w || frame.height() != h {
        return Err(PipelineError::DimensionMismatch {
            expected_w: w,
            expected_h: h,
            actual_w: frame.width(),
            actual_h: frame.height(),
        });
    }
    Ok(())
}

/// Parameters of the display pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub grid_interval_deg: u32,
    pub mesh_thickness_px: u32,
    pub blur_ksize: u32,
    pub blur_sigma: f64,
    pub aux_vertical_deg: f64,
    pub aux_horizontal_deg: f64,
    /// Number of auxiliary windows, split evenly between the two poles.
    /// Zero disables the overlays.
    pub aux_count: u32,
    pub clear_hold_s: f64,
    pub reblur_duration_s: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            grid_interval_deg: 30,
            mesh_thickness_px: 5,
            blur_ksize: 31,
            blur_sigma: 5.0,
            aux_vertical_deg: 45.0,
            aux_horizontal_deg: 120.0,
            aux_count: 6,
            clear_hold_s: 2.0,
            reblur_duration_s: 2.5,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let err = |m: String| Err(PipelineError::Config(m));
        if self.blur_ksize == 0 || self.blur_ksize.is_multiple_of(2) {
            return err(format!("blur_ksize {} must be odd", self.blur_ksize));
        }
        if !(self.blur_sigma.is_finite() && self.blur_sigma > 0.0) {
            return err(format!("blur_sigma {} must be positive", self.blur_sigma));
        }
        if !(self.clear_hold_s.is_finite() && self.clear_hold_s > 0.0) {
            return err(format!(
                "clear_hold_s {} must be positive",
                self.clear_hold_s
            ));
        }
        if !(self.reblur_duration_s.is_finite() && self.reblur_duration_s > 0.0) {
            return err(format!(
                "reblur_duration_s {} must be positive",
                self.reblur_duration_s
            ));
        }
        if !self.aux_count.is_multiple_of(2) {
            return err(format!("aux_count {} must be even", self.aux_count));
        }
        for (name, v) in [
            ("aux_vertical_deg", self.aux_vertical_deg),
            ("aux_horizontal_deg", self.aux_horizontal_deg),
        ] {
            if !(v > 0.0 && v < 180.0) {
                return err(format!("{name} {v} must lie in (0, 180)"));
            }
        }
        if self.aux_vertical_deg > 90.0 {
            return err(format!(
                "aux_vertical_deg {} exceeds a hemisphere",
                self.aux_vertical_deg
            ));
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<crate::raster::GaussianKernel, PipelineError> {
        Ok(crate::raster::GaussianKernel::new(
            self.blur_ksize,
            self.blur_sigma,
        )?)
    }
}
