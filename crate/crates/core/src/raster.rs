//! Frame types and the Gaussian blur shared by the pipeline stages.

use image::RgbImage;
use thiserror::Error;

use crate::geometry::{ErpCoord, PixelRect};

/// 8-bit RGB raster. Every pipeline stage consumes and produces this type.
pub type Frame = RgbImage;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlurError {
    #[error("gaussian kernel size {0} must be odd and positive")]
    KernelSize(u32),
    #[error("gaussian sigma {0} must be positive and finite")]
    Sigma(f64),
}

/// RGB raster of normalised intensities (`u8 / 255`), used where blur and
/// blending results must be kept before quantisation.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearImage {
    width: u32,
    height: u32,
    data: Vec<[f64; 3]>,
}

impl LinearImage {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            data: vec![[0.0; 3]; (width as usize) * (height as usize)],
        }
    }

    pub fn from_frame(frame: &Frame) -> Self {
        Self::from_frame_rect(frame, PixelRect::new(0, 0, frame.width(), frame.height()))
    }

    /// Copies `rect` out of `frame`. The rect must lie inside the frame.
    pub fn from_frame_rect(frame: &Frame, rect: PixelRect) -> Self {
        let mut out = Self::new(rect.width, rect.height);
        for y in 0..rect.height {
            for x in 0..rect.width {
                let p = frame.get_pixel(rect.x + x, rect.y + y).0;
                out.data[(y * rect.width + x) as usize] = [
                    f64::from(p[0]) / 255.0,
                    f64::from(p[1]) / 255.0,
                    f64::from(p[2]) / 255.0,
                ];
            }
        }
        out
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> [f64; 3] {
        self.data[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: [f64; 3]) {
        self.data[(y * self.width + x) as usize] = v;
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn to_frame(&self) -> Frame {
        let mut out = Frame::new(self.width, self.height);
        for (dst, src) in out.pixels_mut().zip(&self.data) {
            dst.0 = quantize(*src);
        }
        out
    }
}

/// Rounds normalised intensities to 8 bits, clamping into range.
pub fn quantize(v: [f64; 3]) -> [u8; 3] {
    v.map(|c| (c * 255.0).round().clamp(0.0, 255.0) as u8)
}

/// Normalised 1-D Gaussian taps, `exp(-(i - r)^2 / 2σ^2)` for `i in 0..size`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKernel {
    taps: Vec<f64>,
}

impl GaussianKernel {
    pub fn new(size: u32, sigma: f64) -> Result<Self, BlurError> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(BlurError::KernelSize(size));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(BlurError::Sigma(sigma));
        }
        let r = f64::from(size / 2);
        let mut taps: Vec<f64> = (0..size)
            .map(|i| {
                let d = f64::from(i) - r;
                (-(d * d) / (2.0 * sigma * sigma)).exp()
            })
            .collect();
        let sum: f64 = taps.iter().sum();
        taps.iter_mut().for_each(|t| *t /= sum);
        Ok(Self { taps })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn radius(&self) -> usize {
        self.taps.len() / 2
    }

    /// Separable blur with clamp-to-edge borders. The taps are symmetric, so
    /// each pass adds mirrored row pairs under one weight, outermost pair
    /// first, then the centre row.
    pub fn blur(&self, src: &LinearImage) -> LinearImage {
        let (w, h) = (src.width as usize, src.height as usize);
        let r = self.radius();
        let flat = src.data.as_flattened();
        let stride = w * 3;
        let mut tmp = vec![0.0f64; stride * h];
        let mut padded = vec![0.0f64; (w + 2 * r) * 3];
        for y in 0..h {
            let row = &flat[y * stride..(y + 1) * stride];
            for i in 0..r {
                padded[i * 3..i * 3 + 3].copy_from_slice(&row[..3]);
                let j = (r + w + i) * 3;
                padded[j..j + 3].copy_from_slice(&row[stride - 3..]);
            }
            padded[r * 3..(r + w) * 3].copy_from_slice(row);
            let out = &mut tmp[y * stride..(y + 1) * stride];
            for k in 0..r {
                let t = self.taps[k];
                let left = &padded[k * 3..k * 3 + stride];
                let right = &padded[(2 * r - k) * 3..(2 * r - k) * 3 + stride];
                for ((o, a), b) in out.iter_mut().zip(left).zip(right) {
                    *o += t * (a + b);
                }
            }
            let t = self.taps[r];
            for (o, c) in out.iter_mut().zip(&padded[r * 3..r * 3 + stride]) {
                *o += t * c;
            }
        }
        let mut out = LinearImage::new(src.width, src.height);
        let dst = out.data.as_flattened_mut();
        for y in 0..h {
            let row = &mut dst[y * stride..(y + 1) * stride];
            for k in 0..r {
                let t = self.taps[k];
                let up = y.saturating_sub(r - k);
                let down = (y + r - k).min(h - 1);
                let a = &tmp[up * stride..(up + 1) * stride];
                let b = &tmp[down * stride..(down + 1) * stride];
                for ((o, a), b) in row.iter_mut().zip(a).zip(b) {
                    *o += t * (a + b);
                }
            }
            let t = self.taps[r];
            for (o, c) in row.iter_mut().zip(&tmp[y * stride..(y + 1) * stride]) {
                *o += t * c;
            }
        }
        out
    }
}

/// Bilinear sample position resolved to buffer offsets, for repeated
/// sampling of same-sized frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearTap {
    offsets: [usize; 4],
    fx: f64,
    fy: f64,
}

impl BilinearTap {
    /// Columns wrap around the antimeridian, rows clamp at the poles.
    pub fn new(p: ErpCoord, width: u32, height: u32) -> Self {
        let (w, h) = (i64::from(width), i64::from(height));
        let x0f = p.x.floor();
        let y0f = p.y.floor();
        let (x0, y0) = (x0f as i64, y0f as i64);
        let wrap = |x: i64| x.rem_euclid(w) as usize;
        let clamp = |y: i64| y.clamp(0, h - 1) as usize;
        let (xa, xb) = (wrap(x0), wrap(x0 + 1));
        let (ya, yb) = (clamp(y0), clamp(y0 + 1));
        let at = |x: usize, y: usize| (y * width as usize + x) * 3;
        Self {
            offsets: [at(xa, ya), at(xb, ya), at(xa, yb), at(xb, yb)],
            fx: p.x - x0f,
            fy: p.y - y0f,
        }
    }

    /// Sample of an RGB8 buffer on the 0..255 scale.
    pub fn sample(&self, raw: &[u8]) -> [f64; 3] {
        let [a, b, c, d] = self.offsets;
        let mut out = [0.0; 3];
        for ch in 0..3 {
            let (pa, pb) = (f64::from(raw[a + ch]), f64::from(raw[b + ch]));
            let (pc, pd) = (f64::from(raw[c + ch]), f64::from(raw[d + ch]));
            let top = pa + (pb - pa) * self.fx;
            let bottom = pc + (pd - pc) * self.fx;
            out[ch] = top + (bottom - top) * self.fy;
        }
        out
    }
}

/// Bilinear sample of an ERP frame at a real pixel position. Columns wrap
/// around the antimeridian, rows clamp at the poles.
pub fn sample_erp_bilinear(frame: &Frame, p: ErpCoord) -> [f64; 3] {
    BilinearTap::new(p, frame.width(), frame.height()).sample(frame.as_raw())
}
