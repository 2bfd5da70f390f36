//! Spherical coordinates, the equirectangular (ERP) pixel mapping, the
//! slice/window/patch grid and the gnomonic sub-window projection.
//!
//! Conventions used throughout the crate:
//!
//! * latitude is positive to the north, longitude grows eastward and is kept
//!   in `[-π, π)`;
//! * ERP row 0 is the north pole, column 0 is longitude `-π`;
//! * pixel `(x, y)` is sampled at its centre, `(x + 0.5, y + 0.5)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("latitude {0} rad outside [-pi/2, pi/2]")]
    Latitude(f64),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("ERP coordinate ({x}, {y}) outside a {width}x{height} raster")]
    ErpOutOfBounds {
        x: f64,
        y: f64,
        width: u32,
        height: u32,
    },
    #[error("window sample ({u}, {v}) outside [0, 1]^2")]
    SampleOutOfRange { u: f64, v: f64 },
    #[error("window half extent {0} rad must lie in (0, pi/2)")]
    HalfExtent(f64),
    #[error("grid configuration: {0}")]
    Grid(String),
}

/// A direction on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalCoord {
    lat: f64,
    lon: f64,
}

/// Wraps a longitude into `[-π, π)`.
pub fn normalize_lon(lon: f64) -> f64 {
    let wrapped = (lon + PI).rem_euclid(TAU) - PI;
    // rem_euclid can return exactly TAU for tiny negative inputs
    if wrapped >= PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

impl SphericalCoord {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeometryError> {
        if !lat.is_finite() || !lon.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&lat) {
            return Err(GeometryError::Latitude(lat));
        }
        Ok(Self {
            lat,
            lon: normalize_lon(lon),
        })
    }

    pub fn from_degrees(lat_deg: f64, lon_deg: f64) -> Result<Self, GeometryError> {
        Self::new(lat_deg.to_radians(), lon_deg.to_radians())
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }

    pub fn to_unit_vector(&self) -> [f64; 3] {
        let (sl, cl) = self.lat.sin_cos();
        let (so, co) = self.lon.sin_cos();
        [cl * co, cl * so, sl]
    }

    /// Direction of a (not necessarily normalised) non-zero vector.
    pub fn from_vector(v: [f64; 3]) -> Result<Self, GeometryError> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(GeometryError::NonFinite);
        }
        let z = (v[2] / norm).clamp(-1.0, 1.0);
        Self::new(z.asin(), v[1].atan2(v[0]))
    }
}

/// Real-valued ERP pixel position (pixel centres at integer values).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErpCoord {
    pub x: f64,
    pub y: f64,
}

impl ErpCoord {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

pub const DEFAULT_INTERVAL_DEG: u32 = 30;

/// Raster size plus the angular interval of the slice grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub width_px: u32,
    pub height_px: u32,
    pub interval_deg: u32,
}

impl GridSpec {
    pub fn new(width_px: u32, height_px: u32, interval_deg: u32) -> Result<Self, GeometryError> {
        let spec = Self {
            width_px,
            height_px,
            interval_deg,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.width_px == 0 || self.height_px == 0 {
            return Err(GeometryError::Grid(
                "raster dimensions must be positive".into(),
            ));
        }
        if self.interval_deg == 0 || 360 % self.interval_deg != 0 || 180 % self.interval_deg != 0 {
            return Err(GeometryError::Grid(format!(
                "interval {} deg does not divide both 360 and 180",
                self.interval_deg
            )));
        }
        if !self.width_px.is_multiple_of(self.cols()) || !self.height_px.is_multiple_of(self.rows())
        {
            return Err(GeometryError::Grid(format!(
                "{}x{} raster is not divisible into {}x{} patches",
                self.width_px,
                self.height_px,
                self.cols(),
                self.rows()
            )));
        }
        Ok(())
    }

    pub fn cols(&self) -> u32 {
        360 / self.interval_deg
    }

    pub fn rows(&self) -> u32 {
        180 / self.interval_deg
    }
}

/// Maps a pixel position to its direction. Accepts the full pixel footprint
/// `[-0.5, w - 0.5] x [-0.5, h - 0.5]`, which is exactly the image of
/// [`sphere_to_erp`].
pub fn erp_to_sphere(
    p: ErpCoord,
    width: u32,
    height: u32,
) -> Result<SphericalCoord, GeometryError> {
    let (w, h) = (f64::from(width), f64::from(height));
    let in_range = |v: f64, n: f64| v.is_finite() && v >= -0.5 && v <= n - 0.5;
    if !in_range(p.x, w) || !in_range(p.y, h) {
        return Err(GeometryError::ErpOutOfBounds {
            x: p.x,
            y: p.y,
            width,
            height,
        });
    }
    let lon = (p.x + 0.5) / w * TAU - PI;
    let lat = FRAC_PI_2 - (p.y + 0.5) / h * PI;
    SphericalCoord::new(lat, lon)
}

pub fn sphere_to_erp(s: SphericalCoord, width: u32, height: u32) -> ErpCoord {
    let (w, h) = (f64::from(width), f64::from(height));
    let lon = normalize_lon(s.lon);
    ErpCoord {
        x: (lon + PI) / TAU * w - 0.5,
        y: (FRAC_PI_2 - s.lat) / PI * h - 0.5,
    }
}

/// Great-circle distance in radians, in `[0, π]`.
/// Uses `atan2(|a x b|, a . b)`, which stays accurate for nearly equal and
/// nearly antipodal points.
pub fn spherical_distance(a: SphericalCoord, b: SphericalCoord) -> f64 {
    let (u, v) = (a.to_unit_vector(), b.to_unit_vector());
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let sin_d = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let cos_d = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    sin_d.atan2(cos_d)
}

/// Spherical centroid (normalised vector mean). `None` for an empty input or
/// when the directions cancel out.
pub fn spherical_centroid<I>(points: I) -> Option<SphericalCoord>
where
    I: IntoIterator<Item = SphericalCoord>,
{
    let mut acc = [0.0f64; 3];
    let mut count = 0usize;
    for p in points {
        let v = p.to_unit_vector();
        acc[0] += v[0];
        acc[1] += v[1];
        acc[2] += v[2];
        count += 1;
    }
    if count == 0 {
        return None;
    }
    let norm = (acc[0] * acc[0] + acc[1] * acc[1] + acc[2] * acc[2]).sqrt();
    if norm < 1e-12 * count as f64 {
        return None;
    }
    SphericalCoord::from_vector(acc).ok()
}

/// A rectangular perspective view on the sphere, north-aligned at `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubWindowSpec {
    pub center: SphericalCoord,
    pub half_extent_h: f64,
    pub half_extent_v: f64,
}

/// Tangent frame of a window: forward (centre), east and north unit vectors.
#[derive(Debug, Clone, Copy)]
pub struct TangentFrame {
    pub forward: [f64; 3],
    pub east: [f64; 3],
    pub north: [f64; 3],
    pub tan_h: f64,
    pub tan_v: f64,
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl SubWindowSpec {
    pub fn new(
        center: SphericalCoord,
        half_extent_h: f64,
        half_extent_v: f64,
    ) -> Result<Self, GeometryError> {
        for e in [half_extent_h, half_extent_v] {
            if !(e > 0.0 && e < FRAC_PI_2) {
                return Err(GeometryError::HalfExtent(e));
            }
        }
        Ok(Self {
            center,
            half_extent_h,
            half_extent_v,
        })
    }

    pub fn tangent_frame(&self) -> Result<TangentFrame, GeometryError> {
        for e in [self.half_extent_h, self.half_extent_v] {
            if !(e > 0.0 && e < FRAC_PI_2) {
                return Err(GeometryError::HalfExtent(e));
            }
        }
        let (sl, cl) = self.center.lat.sin_cos();
        let (so, co) = self.center.lon.sin_cos();
        Ok(TangentFrame {
            forward: [cl * co, cl * so, sl],
            east: [-so, co, 0.0],
            north: [-sl * co, -sl * so, cl],
            tan_h: self.half_extent_h.tan(),
            tan_v: self.half_extent_v.tan(),
        })
    }

    /// Whether `p` falls inside the window's perspective footprint.
    pub fn contains(&self, p: SphericalCoord) -> bool {
        self.tangent_frame()
            .map(|f| f.contains_vector(p.to_unit_vector()))
            .unwrap_or(false)
    }
}

impl TangentFrame {
    /// Direction for normalised window coordinates; `v = 0` is the top edge.
    pub fn sample_vector(&self, u: f64, v: f64) -> [f64; 3] {
        let x = (2.0 * u - 1.0) * self.tan_h;
        let y = (1.0 - 2.0 * v) * self.tan_v;
        [
            self.forward[0] + x * self.east[0] + y * self.north[0],
            self.forward[1] + x * self.east[1] + y * self.north[1],
            self.forward[2] + x * self.east[2] + y * self.north[2],
        ]
    }

    pub fn contains_vector(&self, d: [f64; 3]) -> bool {
        let f = dot(d, self.forward);
        if f <= 0.0 {
            return false;
        }
        let x = dot(d, self.east) / f;
        let y = dot(d, self.north) / f;
        x.abs() <= self.tan_h && y.abs() <= self.tan_v
    }
}

/// Gnomonic (tangent-plane) sample of a window: `(0.5, 0.5)` is the centre,
/// `u` runs west to east and `v` north to south.
pub fn gnomonic_sample(
    window: &SubWindowSpec,
    u: f64,
    v: f64,
) -> Result<SphericalCoord, GeometryError> {
    if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
        return Err(GeometryError::SampleOutOfRange { u, v });
    }
    let frame = window.tangent_frame()?;
    if u == 0.5 && v == 0.5 {
        return Ok(window.center);
    }
    SphericalCoord::from_vector(frame.sample_vector(u, v))
}

/// Pixel rectangle, half-open on both axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRect {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl PixelRect {
    pub fn new(x: u32, y: u32, width: u32, height: u32) -> Self {
        Self {
            x,
            y,
            width,
            height,
        }
    }

    pub fn contains(&self, px: f64, py: f64) -> bool {
        px >= f64::from(self.x)
            && px < f64::from(self.x + self.width)
            && py >= f64::from(self.y)
            && py < f64::from(self.y + self.height)
    }

    pub fn overlaps(&self, other: &PixelRect) -> bool {
        self.x < other.x + other.width
            && other.x < self.x + self.width
            && self.y < other.y + other.height
            && other.y < self.y + self.height
    }

    pub fn area(&self) -> u64 {
        u64::from(self.width) * u64::from(self.height)
    }
}

/// Lat/lon bounds of one spherical slice, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceBounds {
    pub lat_north: f64,
    pub lat_south: f64,
    pub lon_west: f64,
    pub lon_east: f64,
}

impl SliceBounds {
    pub fn center(&self) -> SphericalCoord {
        SphericalCoord::new(
            0.5 * (self.lat_north + self.lat_south),
            0.5 * (self.lon_west + self.lon_east),
        )
        .expect("slice bounds lie on the sphere")
    }
}

/// One (slice, window, patch) triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub row: u32,
    pub col: u32,
    pub slice: SliceBounds,
    pub window: SubWindowSpec,
    pub patch: PixelRect,
}

/// The slice/window/patch correspondence for a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridMapping {
    spec: GridSpec,
    cells: Vec<GridCell>,
}

impl GridMapping {
    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn rows(&self) -> u32 {
        self.spec.rows()
    }

    pub fn cols(&self) -> u32 {
        self.spec.cols()
    }

    pub fn patch_width(&self) -> u32 {
        self.spec.width_px / self.spec.cols()
    }

    pub fn patch_height(&self) -> u32 {
        self.spec.height_px / self.spec.rows()
    }

    pub fn cells(&self) -> &[GridCell] {
        &self.cells
    }

    pub fn cell(&self, row: u32, col: u32) -> &GridCell {
        &self.cells[(row * self.cols() + col) as usize]
    }

    /// Cell whose patch contains pixel `(x, y)`.
    pub fn cell_at_pixel(&self, x: u32, y: u32) -> Option<&GridCell> {
        if x >= self.spec.width_px || y >= self.spec.height_px {
            return None;
        }
        Some(self.cell(y / self.patch_height(), x / self.patch_width()))
    }

    /// Row indices of the two slice rows touching the equator.
    pub fn equator_rows(&self) -> [u32; 2] {
        let mid = self.rows() / 2;
        [mid - 1, mid]
    }
}

pub fn build_grid(spec: GridSpec) -> Result<GridMapping, GeometryError> {
    spec.validate()?;
    let interval = f64::from(spec.interval_deg).to_radians();
    let half = 0.5 * interval;
    let (pw, ph) = (spec.width_px / spec.cols(), spec.height_px / spec.rows());
    let mut cells = Vec::with_capacity((spec.rows() * spec.cols()) as usize);
    for row in 0..spec.rows() {
        for col in 0..spec.cols() {
            let lat_north = FRAC_PI_2 - f64::from(row) * interval;
            let lon_west = -PI + f64::from(col) * interval;
            let slice = SliceBounds {
                lat_north,
                lat_south: lat_north - interval,
                lon_west,
                lon_east: lon_west + interval,
            };
            let window = SubWindowSpec::new(slice.center(), half, half)?;
            cells.push(GridCell {
                row,
                col,
                slice,
                window,
                patch: PixelRect::new(col * pw, row * ph, pw, ph),
            });
        }
    }
    Ok(GridMapping { spec, cells })
}
