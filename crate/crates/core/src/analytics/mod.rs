//! Fixation analytics: fixation maps, spot extraction, shift weights, the
//! shifting loss, clip classification and saliency metrics.

pub mod cluster;
pub mod coattention;
pub mod fixation;
pub mod loss;
pub mod metrics;
pub mod split;
pub mod spot;

use thiserror::Error;

use crate::geometry::{erp_to_sphere, ErpCoord, GeometryError, SphericalCoord};

pub use cluster::{cluster_fixations, ClusterConfig, Clustering};
pub use coattention::{coattention_enhance, DEFAULT_MAX_CELLS};
pub use fixation::{rasterize_fixation_map, DEFAULT_RASTER_SIGMA_DEG};
pub use loss::{build_gt_star, kl_divergence, shifting_loss, GroundTruthFrame, LossConfig};
pub use metrics::{
    fixation_cell, metric_auc_judd, metric_cc, metric_nss, metric_sim, MetricReport,
};
pub use split::{classify_clip, frame_centers, ClipLabel, SplitConfig};
pub use spot::{extract_spot, lightup, shift_weight, FilterConfig, ShiftWeight, Spot};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("no valid samples")]
    EmptyInput,
    #[error("grid shapes differ: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(u32, u32, u32, u32),
    #[error("grid of {0} cells exceeds the configured limit of {1}")]
    TooLarge(usize, usize),
    #[error("sequence lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("map sums to zero and cannot be normalised")]
    Unnormalizable,
    #[error("no spot in one of the frames")]
    AbsentSpot,
    #[error("clip has {0} frames, at least {1} required")]
    TooFewFrames(usize, usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// One recorded gaze direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazeSample {
    pub user_id: u32,
    pub frame_index: u64,
    pub t_ms: u64,
    pub direction: SphericalCoord,
    pub valid: bool,
}

/// Row-major real grid laid out like an ERP (row 0 at the north pole).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

impl FeatureGrid {
    pub fn new(width: u32, height: u32, values: Vec<f64>) -> Result<Self, AnalyticsError> {
        if width == 0 || height == 0 || values.len() != (width as usize) * (height as usize) {
            return Err(AnalyticsError::Range(format!(
                "{} values for a {width}x{height} grid",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(AnalyticsError::Range("non-finite grid value".into()));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn from_fn(
        width: u32,
        height: u32,
        mut f: impl FnMut(u32, u32) -> f64,
    ) -> Result<Self, AnalyticsError> {
        let mut values = Vec::with_capacity((width as usize) * (height as usize));
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, values)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[(y * self.width + x) as usize]
    }

    pub fn same_shape(&self, other: &FeatureGrid) -> Result<(), AnalyticsError> {
        if self.width != other.width || self.height != other.height {
            return Err(AnalyticsError::ShapeMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }

    /// Direction of cell `(x, y)`'s centre.
    pub fn cell_center(&self, x: u32, y: u32) -> SphericalCoord {
        cell_center(x, y, self.width, self.height)
    }
}

pub(crate) fn cell_center(x: u32, y: u32, width: u32, height: u32) -> SphericalCoord {
    erp_to_sphere(ErpCoord::new(f64::from(x), f64::from(y)), width, height)
        .expect("cell index inside the grid")
}

/// Non-negative fixation or saliency density on an ERP-shaped grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FixationMap {
    grid: FeatureGrid,
}

impl FixationMap {
    pub fn new(width: u32, height: u32, values: Vec<f64>) -> Result<Self, AnalyticsError> {
        Self::from_grid(FeatureGrid::new(width, height, values)?)
    }

    pub fn zeros(width: u32, height: u32) -> Self {
        Self {
            grid: FeatureGrid {
                width,
                height,
                values: vec![0.0; (width as usize) * (height as usize)],
            },
        }
    }

    pub fn from_grid(grid: FeatureGrid) -> Result<Self, AnalyticsError> {
        if grid.values.iter().any(|v| *v < 0.0) {
            return Err(AnalyticsError::Range(
                "fixation map has negative values".into(),
            ));
        }
        Ok(Self { grid })
    }

    pub fn width(&self) -> u32 {
        self.grid.width
    }

    pub fn height(&self) -> u32 {
        self.grid.height
    }

    pub fn values(&self) -> &[f64] {
        &self.grid.values
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.grid.get(x, y)
    }

    pub fn as_grid(&self) -> &FeatureGrid {
        &self.grid
    }

    pub fn into_grid(self) -> FeatureGrid {
        self.grid
    }

    pub fn sum(&self) -> f64 {
        self.grid.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.grid.values.iter().copied().fold(0.0, f64::max)
    }

    /// Copy scaled to sum to one.
    pub fn normalized(&self) -> Result<FixationMap, AnalyticsError> {
        let s = self.sum();
        if !(s > 0.0) {
            return Err(AnalyticsError::Unnormalizable);
        }
        Ok(Self {
            grid: FeatureGrid {
                width: self.grid.width,
                height: self.grid.height,
                values: self.grid.values.iter().map(|v| v / s).collect(),
            },
        })
    }

    pub fn same_shape(&self, other: &FixationMap) -> Result<(), AnalyticsError> {
        self.grid.same_shape(&other.grid)
    }
}
