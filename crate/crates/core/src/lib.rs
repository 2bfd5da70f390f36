//! Panoramic display synthesis for 360° video and the fixation analytics
//! that go with it.
//!
//! - [`geometry`]: sphere/ERP conversions, great-circle distance, gnomonic
//!   sub-windows and the slice/window/patch grid.
//! - [`pipeline`]: per-frame display composition and the auxiliary window
//!   state machine.
//! - [`analytics`]: fixation maps, spots, shift weights, losses, clip
//!   classification and saliency metrics.
//! - [`io`]: gaze logs, map files, configuration, frames and sidecars.

pub mod analytics;
pub mod geometry;
pub mod io;
pub mod pipeline;
pub mod raster;

pub use raster::Frame;
