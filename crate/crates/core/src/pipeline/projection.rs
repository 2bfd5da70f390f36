//! Patch re-projection: every ERP patch is replaced by the gnomonic
//! render of its spherical sub-window.

use crate::geometry::{gnomonic_sample, sphere_to_erp, ErpCoord, GridMapping};
use crate::pipeline::{check_dims, PipelineError};
use crate::raster::{quantize, BilinearTap, Frame};

/// Precomputed source position for every output pixel.
#[derive(Debug, Clone)]
pub struct ProjectionPlan {
    width: u32,
    height: u32,
    sources: Vec<ErpCoord>,
    taps: Vec<BilinearTap>,
}

impl ProjectionPlan {
    pub fn new(gm: &GridMapping) -> Result<Self, PipelineError> {
        let spec = gm.spec();
        let (w, h) = (spec.width_px, spec.height_px);
        let (pw, ph) = (gm.patch_width(), gm.patch_height());
        let mut sources = Vec::with_capacity((w as usize) * (h as usize));
        for y in 0..h {
            for x in 0..w {
                let cell = gm.cell(y / ph, x / pw);
                let u = (f64::from(x - cell.patch.x) + 0.5) / f64::from(pw);
                let v = (f64::from(y - cell.patch.y) + 0.5) / f64::from(ph);
                let s = gnomonic_sample(&cell.window, u, v)?;
                sources.push(sphere_to_erp(s, w, h));
            }
        }
        let taps = sources.iter().map(|p| BilinearTap::new(*p, w, h)).collect();
        Ok(Self {
            width: w,
            height: h,
            sources,
            taps,
        })
    }

    pub fn source(&self, x: u32, y: u32) -> ErpCoord {
        self.sources[(y * self.width + x) as usize]
    }

    pub fn apply(&self, erp: &Frame) -> Result<Frame, PipelineError> {
        check_dims(erp, self.width, self.height)?;
        let mut out = Frame::new(self.width, self.height);
        let raw = erp.as_raw();
        for (dst, tap) in out.pixels_mut().zip(&self.taps) {
            dst.0 = quantize(tap.sample(raw).map(|c| c / 255.0));
        }
        Ok(out)
    }
}

/// Builds ERP⋆ from an ERP frame. Rebuilds the plan on every call; use
/// [`ProjectionPlan`] directly when rendering a sequence.
pub fn project_distortion_free(erp: &Frame, gm: &GridMapping) -> Result<Frame, PipelineError> {
    let spec = gm.spec();
    check_dims(erp, spec.width_px, spec.height_px)?;
    ProjectionPlan::new(gm)?.apply(erp)
}
