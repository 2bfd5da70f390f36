//! Rasterising gaze samples into a fixation map.

use crate::analytics::{cell_center, AnalyticsError, FixationMap, GazeSample};
use crate::geometry::spherical_distance;

pub const DEFAULT_RASTER_SIGMA_DEG: f64 = 2.0;

/// Sums a great-circle Gaussian, `exp(-d^2 / 2σ^2)`, centred on every valid
/// sample. Distances are spherical so the kernel wraps across the
/// antimeridian and over the poles.
pub fn rasterize_fixation_map(
    samples: &[GazeSample],
    width: u32,
    height: u32,
    sigma_deg: f64,
) -> Result<FixationMap, AnalyticsError> {
    if !(sigma_deg.is_finite() && sigma_deg > 0.0) {
        return Err(AnalyticsError::Range(format!("sigma {sigma_deg} deg")));
    }
    if width == 0 || height == 0 {
        return Err(AnalyticsError::Range(format!("{width}x{height} raster")));
    }
    let centers: Vec<_> = samples
        .iter()
        .filter(|s| s.valid)
        .map(|s| s.direction)
        .collect();
    if centers.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    let sigma = sigma_deg.to_radians();
    let denom = 2.0 * sigma * sigma;
    let mut values = Vec::with_capacity((width as usize) * (height as usize));
    for y in 0..height {
        for x in 0..width {
            let p = cell_center(x, y, width, height);
            let v: f64 = centers
                .iter()
                .map(|g| {
                    let d = spherical_distance(p, *g);
                    (-(d * d) / denom).exp()
                })
                .sum();
            values.push(v);
        }
    }
    FixationMap::new(width, height, values)
}
