//! Discriminative vertical blur.
//!
//! A patch pixel belongs to the overlap region when the sphere point it shows
//! is also inside the window of its western or eastern neighbour. Only those
//! pixels are replaced by the Gaussian-blurred patch. Windows overlap more the
//! closer they sit to a pole; the two slice rows touching the equator are
//! never blurred.

use crate::geometry::{GridMapping, PixelRect};
use crate::pipeline::{check_dims, PipelineConfig, PipelineError};
use crate::raster::{quantize, Frame, GaussianKernel, LinearImage};

#[derive(Debug, Clone)]
pub struct DvbPlan {
    width: u32,
    height: u32,
    overlap: Vec<bool>,
    /// Patches that contain at least one overlap pixel.
    patches: Vec<PixelRect>,
    kernel: GaussianKernel,
}

impl DvbPlan {
    pub fn new(gm: &GridMapping, cfg: &PipelineConfig) -> Result<Self, PipelineError> {
        let spec = gm.spec();
        let (w, h) = (spec.width_px, spec.height_px);
        let mut overlap = vec![false; (w as usize) * (h as usize)];
        let mut patches = Vec::new();
        let skip = gm.equator_rows();
        let cols = gm.cols();
        for cell in gm.cells() {
            if skip.contains(&cell.row) {
                continue;
            }
            let own = cell.window.tangent_frame()?;
            let west = gm
                .cell(cell.row, (cell.col + cols - 1) % cols)
                .window
                .tangent_frame()?;
            let east = gm
                .cell(cell.row, (cell.col + 1) % cols)
                .window
                .tangent_frame()?;
            let r = cell.patch;
            let mut any = false;
            for py in 0..r.height {
                for px in 0..r.width {
                    let u = (f64::from(px) + 0.5) / f64::from(r.width);
                    let v = (f64::from(py) + 0.5) / f64::from(r.height);
                    let d = own.sample_vector(u, v);
                    if west.contains_vector(d) || east.contains_vector(d) {
                        overlap[((r.y + py) * w + r.x + px) as usize] = true;
                        any = true;
                    }
                }
            }
            if any {
                patches.push(r);
            }
        }
        Ok(Self {
            width: w,
            height: h,
            overlap,
            patches,
            kernel: cfg.kernel()?,
        })
    }

    pub fn is_overlap(&self, x: u32, y: u32) -> bool {
        self.overlap[(y * self.width + x) as usize]
    }

    pub fn overlap_count_in(&self, rect: PixelRect) -> usize {
        let mut n = 0;
        for y in rect.y..rect.y + rect.height {
            for x in rect.x..rect.x + rect.width {
                n += usize::from(self.is_overlap(x, y));
            }
        }
        n
    }

    /// Float path: blurred values are left unquantised.
    pub fn apply_linear(&self, erp_star: &LinearImage) -> LinearImage {
        let mut out = erp_star.clone();
        for r in &self.patches {
            let mut patch = LinearImage::new(r.width, r.height);
            for y in 0..r.height {
                for x in 0..r.width {
                    patch.set(x, y, erp_star.get(r.x + x, r.y + y));
                }
            }
            let blurred = self.kernel.blur(&patch);
            for y in 0..r.height {
                for x in 0..r.width {
                    if self.is_overlap(r.x + x, r.y + y) {
                        out.set(r.x + x, r.y + y, blurred.get(x, y));
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, erp_star: &Frame) -> Result<Frame, PipelineError> {
        check_dims(erp_star, self.width, self.height)?;
        let mut out = erp_star.clone();
        for r in &self.patches {
            let blurred = self
                .kernel
                .blur(&LinearImage::from_frame_rect(erp_star, *r));
            for y in 0..r.height {
                for x in 0..r.width {
                    if self.is_overlap(r.x + x, r.y + y) {
                        out.get_pixel_mut(r.x + x, r.y + y).0 = quantize(blurred.get(x, y));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Applies the blur to ERP⋆ (the output of the re-projection stage).
pub fn discriminative_vertical_blur(
    erp_star: &Frame,
    gm: &GridMapping,
    cfg: &PipelineConfig,
) -> Result<Frame, PipelineError> {
    DvbPlan::new(gm, cfg)?.apply(erp_star)
}
