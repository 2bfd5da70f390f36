//! Gaze log CSV.
//!
//! ```text
//! user_id,frame_index,t_ms,x_norm,y_norm,valid
//! 0,0,0,0.5,0.25,1
//! 0,1,16,0.5012,0.25,1
//! ```
//!
//! Coordinates are normalised display coordinates. Floats are written in
//! their shortest round-trip decimal form, so a log read back and written
//! again is byte-identical.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use crate::analytics::GazeSample;
use crate::geometry::{gnomonic_sample, GridMapping, SphericalCoord};
use crate::io::{io_err, IoFormatError};
use crate::pipeline::AuxLayout;

pub const GAZE_LOG_HEADER: &str = "user_id,frame_index,t_ms,x_norm,y_norm,valid";
const FIELDS: [&str; 6] = [
    "user_id",
    "frame_index",
    "t_ms",
    "x_norm",
    "y_norm",
    "valid",
];

/// One gaze log row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazeRecord {
    pub user_id: u32,
    pub frame_index: u64,
    pub t_ms: u64,
    pub x_norm: f64,
    pub y_norm: f64,
    pub valid: bool,
}

/// How normalised display coordinates map to viewing directions.
#[derive(Debug, Clone)]
pub enum DisplayMapping {
    /// The display is the ERP frame itself.
    Erp,
    /// The display is a composed WinDB frame: points inside an auxiliary
    /// rect map through that window, all others through their patch window.
    WinDb {
        grid: GridMapping,
        layout: AuxLayout,
    },
}

impl DisplayMapping {
    pub fn direction(&self, x_norm: f64, y_norm: f64) -> Result<SphericalCoord, IoFormatError> {
        if !in_unit(x_norm) || !in_unit(y_norm) {
            return Err(IoFormatError::Invalid(format!(
                "display point ({x_norm}, {y_norm}) outside [0, 1]"
            )));
        }
        let dir = match self {
            DisplayMapping::Erp => {
                SphericalCoord::new(FRAC_PI_2 - y_norm * PI, x_norm * 2.0 * PI - PI)
            }
            DisplayMapping::WinDb { grid, layout } => {
                let spec = grid.spec();
                let px = x_norm * f64::from(spec.width_px);
                let py = y_norm * f64::from(spec.height_px);
                if let Some(w) = layout
                    .windows()
                    .iter()
                    .find(|w| w.display_rect.contains(px, py))
                {
                    let r = w.display_rect;
                    gnomonic_sample(
                        &w.spec,
                        (px - f64::from(r.x)) / f64::from(r.width),
                        (py - f64::from(r.y)) / f64::from(r.height),
                    )
                } else {
                    let cx = (px.floor() as u32).min(spec.width_px - 1);
                    let cy = (py.floor() as u32).min(spec.height_px - 1);
                    let cell = grid.cell_at_pixel(cx, cy).expect("pixel inside the grid");
                    let r = cell.patch;
                    gnomonic_sample(
                        &cell.window,
                        (px - f64::from(r.x)) / f64::from(r.width),
                        (py - f64::from(r.y)) / f64::from(r.height),
                    )
                }
            }
        };
        dir.map_err(|e| IoFormatError::Invalid(e.to_string()))
    }
}

impl GazeRecord {
    pub fn to_sample(&self, mapping: &DisplayMapping) -> Result<GazeSample, IoFormatError> {
        Ok(GazeSample {
            user_id: self.user_id,
            frame_index: self.frame_index,
            t_ms: self.t_ms,
            direction: mapping.direction(self.x_norm, self.y_norm)?,
            valid: self.valid,
        })
    }
}

fn in_unit(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

fn check_record(
    r: &GazeRecord,
    line: u64,
    last: &mut HashMap<u32, u64>,
) -> Result<(), IoFormatError> {
    let invalid = |detail: String| Err(IoFormatError::Validation { line, detail });
    if !in_unit(r.x_norm) {
        return invalid(format!("x_norm {} outside [0, 1]", r.x_norm));
    }
    if !in_unit(r.y_norm) {
        return invalid(format!("y_norm {} outside [0, 1]", r.y_norm));
    }
    if let Some(&prev) = last.get(&r.user_id) {
        if r.t_ms < prev {
            return invalid(format!(
                "t_ms {} after {prev} for user {}",
                r.t_ms, r.user_id
            ));
        }
    }
    last.insert(r.user_id, r.t_ms);
    Ok(())
}

fn parse_field<T: std::str::FromStr>(raw: &str, name: &str, line: u64) -> Result<T, IoFormatError> {
    raw.parse().map_err(|_| IoFormatError::Parse {
        line,
        detail: format!("bad {name} '{raw}'"),
    })
}

pub fn parse_gaze_log(text: &str) -> Result<Vec<GazeRecord>, IoFormatError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = rdr.records();
    let header = rows
        .next()
        .ok_or(IoFormatError::Parse {
            line: 1,
            detail: "missing header".into(),
        })?
        .map_err(|e| csv_error(&e))?;
    if header.iter().ne(FIELDS) {
        return Err(IoFormatError::Parse {
            line: 1,
            detail: format!("header must be '{GAZE_LOG_HEADER}'"),
        });
    }
    let mut out = Vec::new();
    let mut last = HashMap::new();
    for row in rows {
        let row = row.map_err(|e| csv_error(&e))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != FIELDS.len() {
            return Err(IoFormatError::Parse {
                line,
                detail: format!("expected {} fields, found {}", FIELDS.len(), row.len()),
            });
        }
        let x_norm: f64 = parse_field(&row[3], "x_norm", line)?;
        let y_norm: f64 = parse_field(&row[4], "y_norm", line)?;
        let valid = match &row[5] {
            "0" => false,
            "1" => true,
            other => {
                return Err(IoFormatError::Parse {
                    line,
                    detail: format!("valid must be 0 or 1, found '{other}'"),
                })
            }
        };
        let rec = GazeRecord {
            user_id: parse_field(&row[0], "user_id", line)?,
            frame_index: parse_field(&row[1], "frame_index", line)?,
            t_ms: parse_field(&row[2], "t_ms", line)?,
            x_norm,
            y_norm,
            valid,
        };
        check_record(&rec, line, &mut last)?;
        out.push(rec);
    }
    Ok(out)
}

fn csv_error(e: &csv::Error) -> IoFormatError {
    IoFormatError::Parse {
        line: e.position().map_or(0, |p| p.line()),
        detail: e.to_string(),
    }
}

/// Canonical text of a log. Rows are validated as on read; the reported line
/// is the row's line in the output.
pub fn render_gaze_log(records: &[GazeRecord]) -> Result<String, IoFormatError> {
    let mut last = HashMap::new();
    let mut out = String::with_capacity(GAZE_LOG_HEADER.len() + 1 + records.len() * 32);
    out.push_str(GAZE_LOG_HEADER);
    out.push('\n');
    for (i, r) in records.iter().enumerate() {
        check_record(r, i as u64 + 2, &mut last)?;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.user_id,
            r.frame_index,
            r.t_ms,
            r.x_norm,
            r.y_norm,
            u8::from(r.valid)
        ));
    }
    Ok(out)
}

pub fn read_gaze_log(path: &Path) -> Result<Vec<GazeRecord>, IoFormatError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_gaze_log(&text)
}

pub fn write_gaze_log(records: &[GazeRecord], path: &Path) -> Result<(), IoFormatError> {
    let text = render_gaze_log(records)?;
    std::fs::write(path, text).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{PipelineConfig, WinDbRenderer};

    fn rec(user_id: u32, t_ms: u64, x: f64, y: f64) -> GazeRecord {
        GazeRecord {
            user_id,
            frame_index: t_ms / 16,
            t_ms,
            x_norm: x,
            y_norm: y,
            valid: true,
        }
    }

    #[test]
    fn header_only_is_empty() {
        assert!(parse_gaze_log(&format!("{GAZE_LOG_HEADER}\n"))
            .unwrap()
            .is_empty());
        assert!(parse_gaze_log(GAZE_LOG_HEADER).unwrap().is_empty());
    }

    #[test]
    fn canonical_text() {
        let text = render_gaze_log(&[rec(3, 16, 0.1, 1.0), rec(3, 16, 0.0, 0.333)]).unwrap();
        assert_eq!(
            text,
            format!("{GAZE_LOG_HEADER}\n3,1,16,0.1,1,1\n3,1,16,0,0.333,1\n")
        );
        assert_eq!(
            render_gaze_log(&parse_gaze_log(&text).unwrap()).unwrap(),
            text
        );
    }

    #[test]
    fn out_of_range_coordinate() {
        let text = format!("{GAZE_LOG_HEADER}\n0,0,0,0.5,0.5,1\n0,0,5,1.5,0.5,1\n");
        match parse_gaze_log(&text) {
            Err(IoFormatError::Validation { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(render_gaze_log(&[rec(0, 0, 1.5, 0.5)]).is_err());
    }

    #[test]
    fn decreasing_time_within_user() {
        let ok = format!("{GAZE_LOG_HEADER}\n0,0,50,0.5,0.5,1\n1,0,10,0.5,0.5,1\n");
        assert_eq!(parse_gaze_log(&ok).unwrap().len(), 2);
        let bad = format!("{GAZE_LOG_HEADER}\n0,0,50,0.5,0.5,1\n0,0,10,0.5,0.5,1\n");
        assert!(matches!(
            parse_gaze_log(&bad),
            Err(IoFormatError::Validation { line: 3, .. })
        ));
    }

    #[test]
    fn malformed_rows_name_their_line() {
        for body in [
            "0,0,0,0.5,0.5,2",
            "0,0,0,abc,0.5,1",
            "0,0,0,0.5,0.5",
            "-1,0,0,0.5,0.5,1",
        ] {
            let text = format!("{GAZE_LOG_HEADER}\n0,0,0,0.5,0.5,1\n{body}\n");
            assert!(
                matches!(
                    parse_gaze_log(&text),
                    Err(IoFormatError::Parse { line: 3, .. })
                ),
                "{body}"
            );
        }
        assert!(matches!(
            parse_gaze_log("a,b\n"),
            Err(IoFormatError::Parse { line: 1, .. })
        ));
        assert!(parse_gaze_log("").is_err());
    }

    #[test]
    fn erp_mapping() {
        let d = DisplayMapping::Erp.direction(0.5, 0.5).unwrap();
        assert!(d.lat().abs() < 1e-12 && d.lon().abs() < 1e-12);
        let n = DisplayMapping::Erp.direction(0.25, 0.0).unwrap();
        assert!((n.lat() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn windb_mapping_uses_patch_and_aux_windows() {
        let r = WinDbRenderer::new(768, 384, &PipelineConfig::default()).unwrap();
        let m = DisplayMapping::WinDb {
            grid: r.grid().clone(),
            layout: r.layout().clone(),
        };
        // centre of patch (row 2, col 6) is its window centre
        let cell = r.grid().cell(2, 6);
        let p = cell.patch;
        let d = m
            .direction(
                (f64::from(p.x) + f64::from(p.width) / 2.0) / 768.0,
                (f64::from(p.y) + f64::from(p.height) / 2.0) / 384.0,
            )
            .unwrap();
        assert!(crate::geometry::spherical_distance(d, cell.window.center) < 1e-12);
        // centre of the first aux rect is its window centre
        let w = r.layout().windows()[0];
        let c = w.display_rect;
        let d = m
            .direction(
                (f64::from(c.x) + f64::from(c.width) / 2.0) / 768.0,
                (f64::from(c.y) + f64::from(c.height) / 2.0) / 384.0,
            )
            .unwrap();
        assert!(crate::geometry::spherical_distance(d, w.spec.center) < 1e-12);
    }
}
