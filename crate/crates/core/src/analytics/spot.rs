//! Spot extraction (dynamic thresholding + connected components), the shift
//! weight between two spots and the lightup enhancement.

use std::collections::VecDeque;

use crate::analytics::{AnalyticsError, FeatureGrid};
use crate::geometry::{spherical_centroid, spherical_distance, SphericalCoord};

/// Upper bound of the frame offset `m` between the two frames of a shift.
pub const MAX_FRAME_OFFSET: u32 = 15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    /// Fraction of the grid maximum a cell must reach to stay.
    pub td_threshold: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { td_threshold: 0.4 }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), AnalyticsError> {
        if !(self.td_threshold > 0.0 && self.td_threshold <= 1.0) {
            return Err(AnalyticsError::Config(format!(
                "td_threshold {} must lie in (0, 1]",
                self.td_threshold
            )));
        }
        Ok(())
    }
}

/// A connected high-response region.
#[derive(Debug, Clone, PartialEq)]
pub struct Spot {
    /// Member cells as `(x, y)`, sorted row-major.
    pub cells: Vec<(u32, u32)>,
    pub centroid: SphericalCoord,
    pub mean_response: f64,
}

impl Spot {
    /// Spot over explicit cells of a `width x height` grid, its centroid the
    /// spherical mean of the cell centres.
    pub fn from_cells(
        mut cells: Vec<(u32, u32)>,
        width: u32,
        height: u32,
        mean_response: f64,
    ) -> Result<Self, AnalyticsError> {
        if cells.is_empty() {
            return Err(AnalyticsError::Range("spot without cells".into()));
        }
        if cells.iter().any(|&(x, y)| x >= width || y >= height) {
            return Err(AnalyticsError::Range("spot cell outside the grid".into()));
        }
        cells.sort_by_key(|&(x, y)| (y, x));
        cells.dedup();
        let centers = cells
            .iter()
            .map(|&(x, y)| super::cell_center(x, y, width, height));
        // a region wrapping all the way around a latitude ring has no mean
        // direction; fall back to its first cell
        let centroid = spherical_centroid(centers)
            .unwrap_or_else(|| super::cell_center(cells[0].0, cells[0].1, width, height));
        Ok(Self {
            cells,
            centroid,
            mean_response,
        })
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        self.cells
            .binary_search_by_key(&(y, x), |&(cx, cy)| (cy, cx))
            .is_ok()
    }
}

/// 4-neighbours of a cell; columns wrap east-west, rows do not wrap.
pub(crate) fn neighbours(
    x: u32,
    y: u32,
    width: u32,
    height: u32,
) -> impl Iterator<Item = (u32, u32)> {
    let west = (x + width - 1) % width;
    let east = (x + 1) % width;
    let mut out = [None; 4];
    out[0] = Some((west, y));
    out[1] = Some((east, y));
    if y > 0 {
        out[2] = Some((x, y - 1));
    }
    if y + 1 < height {
        out[3] = Some((x, y + 1));
    }
    out.into_iter().flatten()
}

/// Thresholds at `td * max`, labels the surviving cells and returns the
/// component with the highest mean response. Cells must be positive and at
/// least `td * max`, so `td = 1` keeps exactly the maxima. Ties go to the
/// component reached first in row-major order.
pub fn extract_spot(
    grid: &FeatureGrid,
    cfg: &FilterConfig,
) -> Result<Option<Spot>, AnalyticsError> {
    cfg.validate()?;
    let (w, h) = (grid.width(), grid.height());
    let max = grid
        .values()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Ok(None);
    }
    let cut = cfg.td_threshold * max;
    let kept: Vec<bool> = grid
        .values()
        .iter()
        .map(|&v| v > 0.0 && v - cut >= 0.0)
        .collect();
    let mut visited = vec![false; kept.len()];
    let mut best: Option<(f64, Vec<(u32, u32)>)> = None;
    let mut queue = VecDeque::new();
    for start in 0..kept.len() {
        if !kept[start] || visited[start] {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        let mut members = Vec::new();
        let mut sum = 0.0;
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i as u32) % w, (i as u32) / w);
            members.push((x, y));
            sum += grid.values()[i];
            for (nx, ny) in neighbours(x, y, w, h) {
                let j = (ny * w + nx) as usize;
                if kept[j] && !visited[j] {
                    visited[j] = true;
                    queue.push_back(j);
                }
            }
        }
        let mean = sum / members.len() as f64;
        if best.as_ref().is_none_or(|(m, _)| mean > *m) {
            best = Some((mean, members));
        }
    }
    best.map(|(mean, cells)| Spot::from_cells(cells, w, h, mean))
        .transpose()
}

/// Spherical distance between two spots' centroids, tagged with the frame
/// pair it was measured on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftWeight {
    pub omega: f64,
    pub frame: u64,
    pub offset: u32,
}

impl ShiftWeight {
    pub fn new(omega: f64, frame: u64, offset: u32) -> Result<Self, AnalyticsError> {
        if !(0.0..=std::f64::consts::PI).contains(&omega) {
            return Err(AnalyticsError::Range(format!(
                "omega {omega} outside [0, pi]"
            )));
        }
        if !(1..=MAX_FRAME_OFFSET).contains(&offset) {
            return Err(AnalyticsError::Range(format!(
                "frame offset {offset} outside 1..={MAX_FRAME_OFFSET}"
            )));
        }
        Ok(Self {
            omega,
            frame,
            offset,
        })
    }
}

/// `ω` between two spots. A missing spot is an error; callers that follow the
/// "no shift evidence" convention use [`shift_weight_or_zero`].
pub fn shift_weight(a: Option<&Spot>, b: Option<&Spot>) -> Result<f64, AnalyticsError> {
    match (a, b) {
        (Some(a), Some(b)) => Ok(spherical_distance(a.centroid, b.centroid)),
        _ => Err(AnalyticsError::AbsentSpot),
    }
}

pub fn shift_weight_or_zero(a: Option<&Spot>, b: Option<&Spot>) -> f64 {
    shift_weight(a, b).unwrap_or(0.0)
}

/// Multiplies the spot's cells by `1 + ω`; every other cell is copied.
pub fn lightup(grid: &FeatureGrid, spot: &Spot, omega: f64) -> Result<FeatureGrid, AnalyticsError> {
    if !(omega.is_finite() && omega >= 0.0) {
        return Err(AnalyticsError::Range(format!(
            "omega {omega} must be non-negative"
        )));
    }
    let (w, h) = (grid.width(), grid.height());
    if spot.cells.iter().any(|&(x, y)| x >= w || y >= h) {
        return Err(AnalyticsError::Range("spot cell outside the grid".into()));
    }
    let mut values = grid.values().to_vec();
    let factor = 1.0 + omega;
    for &(x, y) in &spot.cells {
        values[(y * w + x) as usize] *= factor;
    }
    FeatureGrid::new(w, h, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn grid(w: u32, h: u32, cells: &[((u32, u32), f64)]) -> FeatureGrid {
        let mut v = vec![0.0; (w * h) as usize];
        for &((x, y), val) in cells {
            v[(y * w + x) as usize] = val;
        }
        FeatureGrid::new(w, h, v).unwrap()
    }

    #[test]
    fn single_block_is_the_spot() {
        let mut cells = Vec::new();
        for y in 2..4 {
            for x in 3..6 {
                cells.push(((x, y), 1.0));
            }
        }
        let g = grid(8, 6, &cells);
        let s = extract_spot(&g, &FilterConfig::default()).unwrap().unwrap();
        assert_eq!(s.cells.len(), 6);
        assert!(s.contains(3, 2) && s.contains(5, 3) && !s.contains(6, 3));
        assert_eq!(s.mean_response, 1.0);
    }

    #[test]
    fn higher_mean_region_wins() {
        let g = grid(
            8,
            6,
            &[
                ((0, 0), 0.9),
                ((1, 0), 0.9),
                ((5, 4), 0.8),
                ((5, 5), 0.8),
                ((6, 5), 0.8),
            ],
        );
        let s = extract_spot(&g, &FilterConfig::default()).unwrap().unwrap();
        assert_eq!(s.cells, vec![(0, 0), (1, 0)]);
        assert_abs_diff_eq!(s.mean_response, 0.9, epsilon = 1e-15);
    }

    #[test]
    fn wraps_east_west_not_over_poles() {
        let g = grid(
            8,
            4,
            &[((0, 1), 1.0), ((7, 1), 1.0), ((3, 0), 0.5), ((3, 3), 0.5)],
        );
        let s = extract_spot(&g, &FilterConfig::default()).unwrap().unwrap();
        assert_eq!(s.cells, vec![(0, 1), (7, 1)]);
        // centroid sits on the antimeridian
        assert_abs_diff_eq!(s.centroid.lon().abs(), PI, epsilon = 1e-12);
    }

    #[test]
    fn full_threshold_keeps_argmax_only() {
        let g = grid(6, 3, &[((1, 1), 2.0), ((2, 1), 1.9), ((4, 2), 2.0)]);
        let s = extract_spot(&g, &FilterConfig { td_threshold: 1.0 })
            .unwrap()
            .unwrap();
        assert_eq!(s.cells, vec![(1, 1)]);
    }

    #[test]
    fn no_positive_cells_gives_none() {
        let g = grid(4, 2, &[((1, 1), -1.0)]);
        assert_eq!(extract_spot(&g, &FilterConfig::default()).unwrap(), None);
        assert!(extract_spot(&g, &FilterConfig { td_threshold: 0.0 }).is_err());
    }

    fn spot_at(lat: f64, lon: f64) -> Spot {
        Spot {
            cells: vec![(0, 0)],
            centroid: SphericalCoord::new(lat, lon).unwrap(),
            mean_response: 1.0,
        }
    }

    #[test]
    fn shift_weight_examples() {
        let a = spot_at(0.0, 0.0);
        let b = spot_at(0.0, FRAC_PI_2);
        assert_eq!(shift_weight(Some(&a), Some(&a)).unwrap(), 0.0);
        assert_abs_diff_eq!(
            shift_weight(Some(&a), Some(&b)).unwrap(),
            FRAC_PI_2,
            epsilon = 1e-12
        );
        let n = spot_at(FRAC_PI_2, 0.0);
        let s = spot_at(-FRAC_PI_2, 0.0);
        assert_abs_diff_eq!(
            shift_weight(Some(&n), Some(&s)).unwrap(),
            PI,
            epsilon = 1e-12
        );
        assert_eq!(
            shift_weight(Some(&a), None),
            Err(AnalyticsError::AbsentSpot)
        );
        assert_eq!(shift_weight_or_zero(None, Some(&a)), 0.0);
        assert!(ShiftWeight::new(0.5, 3, 16).is_err());
        assert!(ShiftWeight::new(-0.1, 3, 1).is_err());
        assert!(ShiftWeight::new(0.5, 3, 15).is_ok());
    }

    #[test]
    fn lightup_examples() {
        let g = grid(3, 2, &[((0, 0), 2.0), ((1, 0), 5.0), ((2, 1), 1.0)]);
        let spot = Spot::from_cells(vec![(0, 0), (2, 1)], 3, 2, 1.5).unwrap();
        assert_eq!(lightup(&g, &spot, 0.0).unwrap(), g);
        let lit = lightup(&g, &spot, 0.5).unwrap();
        assert_eq!(lit.get(0, 0), 3.0);
        assert_eq!(lit.get(2, 1), 1.5);
        assert_eq!(lit.get(1, 0), 5.0);
        assert!(lightup(&g, &spot, -0.1).is_err());
    }
}
