//! Mesh screen: a black grid laid over the patch boundaries.

use crate::geometry::GridMapping;
use crate::pipeline::{check_dims, PipelineError};
use crate::raster::Frame;

/// Binary mask, `false` on grid-line bands.
///
/// A band of `t` pixels straddles every patch boundary `b`, covering columns
/// (or rows) `b - t/2 ..= b - t/2 + t - 1`. Vertical lines include the
/// antimeridian seam, which wraps around the raster edge; there is no
/// horizontal line at the poles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeshMask {
    width: u32,
    height: u32,
    thickness_px: u32,
    open: Vec<bool>,
}

impl MeshMask {
    pub fn new(gm: &GridMapping, thickness_px: u32) -> Self {
        let spec = gm.spec();
        let (w, h) = (spec.width_px, spec.height_px);
        let mut line_col = vec![false; w as usize];
        let mut line_row = vec![false; h as usize];
        let lead = i64::from(thickness_px / 2);
        for c in 0..gm.cols() {
            let b = i64::from(c * gm.patch_width());
            for k in 0..i64::from(thickness_px) {
                let x = (b - lead + k).rem_euclid(i64::from(w));
                line_col[x as usize] = true;
            }
        }
        for r in 1..gm.rows() {
            let b = i64::from(r * gm.patch_height());
            for k in 0..i64::from(thickness_px) {
                let y = b - lead + k;
                if (0..i64::from(h)).contains(&y) {
                    line_row[y as usize] = true;
                }
            }
        }
        let mut open = Vec::with_capacity((w as usize) * (h as usize));
        for &row in &line_row {
            open.extend(line_col.iter().map(|&col| !(col || row)));
        }
        Self {
            width: w,
            height: h,
            thickness_px,
            open,
        }
    }

    /// Mask with no grid lines.
    pub fn all_open(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            thickness_px: 0,
            open: vec![true; (width as usize) * (height as usize)],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn thickness_px(&self) -> u32 {
        self.thickness_px
    }

    pub fn is_open(&self, x: u32, y: u32) -> bool {
        self.open[(y * self.width + x) as usize]
    }

    pub fn closed_count(&self) -> usize {
        self.open.iter().filter(|o| !**o).count()
    }
}

/// `frame ⊙ mask`: grid-line pixels become black, the rest is copied.
pub fn apply_mesh(frame: &Frame, mask: &MeshMask) -> Result<Frame, PipelineError> {
    check_dims(frame, mask.width, mask.height)?;
    let mut out = frame.clone();
    for (p, open) in out.pixels_mut().zip(&mask.open) {
        if !open {
            p.0 = [0, 0, 0];
        }
    }
    Ok(out)
}
