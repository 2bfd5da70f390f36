//! Blind / ordinary clip classification from per-frame fixation centres.

use std::fmt;

use crate::analytics::cluster::{cluster_fixations, ClusterConfig};
use crate::analytics::AnalyticsError;
use crate::geometry::{spherical_centroid, spherical_distance, SphericalCoord};

/// Distances within this slack of the threshold count as reaching it.
const THRESHOLD_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConfig {
    pub window: usize,
    pub theta_deg: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            window: 15,
            theta_deg: 110.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClipLabel {
    Blind,
    Ordinary,
}

impl fmt::Display for ClipLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClipLabel::Blind => "blind",
            ClipLabel::Ordinary => "ordinary",
        })
    }
}

/// Largest pairwise distance inside any window of `window` consecutive
/// centres.
pub fn max_window_distance(
    centers: &[SphericalCoord],
    window: usize,
) -> Result<f64, AnalyticsError> {
    if window < 2 {
        return Err(AnalyticsError::Config(format!(
            "window {window} must be at least 2"
        )));
    }
    if centers.len() < window {
        return Err(AnalyticsError::TooFewFrames(centers.len(), window));
    }
    let mut best = 0.0f64;
    for start in 0..=centers.len() - window {
        let w = &centers[start..start + window];
        for i in 0..window {
            for j in i + 1..window {
                best = best.max(spherical_distance(w[i], w[j]));
            }
        }
    }
    Ok(best)
}

/// A clip is blind when some window of consecutive frames contains two
/// centres at least `theta` apart.
pub fn classify_clip(
    centers: &[SphericalCoord],
    cfg: &SplitConfig,
) -> Result<ClipLabel, AnalyticsError> {
    if !(cfg.theta_deg > 0.0 && cfg.theta_deg <= 180.0) {
        return Err(AnalyticsError::Config(format!(
            "theta {} deg",
            cfg.theta_deg
        )));
    }
    let max = max_window_distance(centers, cfg.window)?;
    Ok(if max >= cfg.theta_deg.to_radians() - THRESHOLD_EPS {
        ClipLabel::Blind
    } else {
        ClipLabel::Ordinary
    })
}

/// Per-frame fixation centre: the centroid of the frame's largest cluster.
/// Frames without a cluster repeat the previous centre; leading frames
/// without one are dropped.
pub fn frame_centers(
    per_frame: &[Vec<SphericalCoord>],
    cfg: &ClusterConfig,
) -> Result<Vec<SphericalCoord>, AnalyticsError> {
    let mut out = Vec::with_capacity(per_frame.len());
    let mut last: Option<SphericalCoord> = None;
    for points in per_frame {
        let c = cluster_fixations(points, cfg)?;
        let center = c
            .largest()
            .and_then(|members| spherical_centroid(members.iter().map(|&i| points[i])));
        if let Some(center) = center.or(last) {
            out.push(center);
            last = Some(center);
        }
    }
    Ok(out)
}
