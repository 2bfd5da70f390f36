//! `key = value` configuration files.
//!
//! ```text
//! # display
//! blur_sigma = 5
//! clear_hold_s = 2.0
//! td_threshold = 0.4
//! ```
//!
//! Blank lines and `#` comments are ignored. Absent keys keep their
//! defaults; unknown or repeated keys are rejected.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use crate::analytics::{
    FilterConfig, LossConfig, SplitConfig, DEFAULT_MAX_CELLS, DEFAULT_RASTER_SIGMA_DEG,
};
use crate::io::{io_err, IoFormatError};
use crate::pipeline::PipelineConfig;

/// Every tunable of the toolkit.
#[derive(Debug, Clone, PartialEq)]
pub struct ToolkitConfig {
    pub pipeline: PipelineConfig,
    pub filter: FilterConfig,
    pub loss: LossConfig,
    pub split: SplitConfig,
    pub raster_sigma_deg: f64,
    /// Playback rate of clips; one frame per tick.
    pub fps: u32,
    pub max_coattention_cells: usize,
}

impl Default for ToolkitConfig {
    fn default() -> Self {
        Self {
            pipeline: PipelineConfig::default(),
            filter: FilterConfig::default(),
            loss: LossConfig::default(),
            split: SplitConfig::default(),
            raster_sigma_deg: DEFAULT_RASTER_SIGMA_DEG,
            fps: 60,
            max_coattention_cells: DEFAULT_MAX_CELLS,
        }
    }
}

pub const CONFIG_KEYS: [&str; 18] = [
    "grid_interval_deg",
    "mesh_thickness_px",
    "blur_ksize",
    "blur_sigma",
    "aux_vertical_deg",
    "aux_horizontal_deg",
    "aux_count",
    "clear_hold_s",
    "reblur_duration_s",
    "td_threshold",
    "lambda",
    "eps_deg",
    "min_pts",
    "split_window",
    "theta_deg",
    "raster_sigma_deg",
    "fps",
    "max_coattention_cells",
];

impl ToolkitConfig {
    fn get(&self, key: &str) -> String {
        let p = &self.pipeline;
        match key {
            "grid_interval_deg" => p.grid_interval_deg.to_string(),
            "mesh_thickness_px" => p.mesh_thickness_px.to_string(),
            "blur_ksize" => p.blur_ksize.to_string(),
            "blur_sigma" => p.blur_sigma.to_string(),
            "aux_vertical_deg" => p.aux_vertical_deg.to_string(),
            "aux_horizontal_deg" => p.aux_horizontal_deg.to_string(),
            "aux_count" => p.aux_count.to_string(),
            "clear_hold_s" => p.clear_hold_s.to_string(),
            "reblur_duration_s" => p.reblur_duration_s.to_string(),
            "td_threshold" => self.filter.td_threshold.to_string(),
            "lambda" => self.loss.lambda.to_string(),
            "eps_deg" => self.loss.cluster.eps_deg.to_string(),
            "min_pts" => self.loss.cluster.min_pts.to_string(),
            "split_window" => self.split.window.to_string(),
            "theta_deg" => self.split.theta_deg.to_string(),
            "raster_sigma_deg" => self.raster_sigma_deg.to_string(),
            "fps" => self.fps.to_string(),
            "max_coattention_cells" => self.max_coattention_cells.to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    fn set(&mut self, key: &str, raw: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(raw: &str) -> Result<T, String> {
            raw.parse().map_err(|_| format!("bad value '{raw}'"))
        }
        let p = &mut self.pipeline;
        match key {
            "grid_interval_deg" => p.grid_interval_deg = num(raw)?,
            "mesh_thickness_px" => p.mesh_thickness_px = num(raw)?,
            "blur_ksize" => p.blur_ksize = num(raw)?,
            "blur_sigma" => p.blur_sigma = num(raw)?,
            "aux_vertical_deg" => p.aux_vertical_deg = num(raw)?,
            "aux_horizontal_deg" => p.aux_horizontal_deg = num(raw)?,
            "aux_count" => p.aux_count = num(raw)?,
            "clear_hold_s" => p.clear_hold_s = num(raw)?,
            "reblur_duration_s" => p.reblur_duration_s = num(raw)?,
            "td_threshold" => self.filter.td_threshold = num(raw)?,
            "lambda" => self.loss.lambda = num(raw)?,
            "eps_deg" => self.loss.cluster.eps_deg = num(raw)?,
            "min_pts" => self.loss.cluster.min_pts = num(raw)?,
            "split_window" => self.split.window = num(raw)?,
            "theta_deg" => self.split.theta_deg = num(raw)?,
            "raster_sigma_deg" => self.raster_sigma_deg = num(raw)?,
            "fps" => self.fps = num(raw)?,
            "max_coattention_cells" => self.max_coattention_cells = num(raw)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), IoFormatError> {
        let invalid = |e: String| IoFormatError::Invalid(e);
        self.pipeline
            .validate()
            .map_err(|e| invalid(e.to_string()))?;
        self.filter.validate().map_err(|e| invalid(e.to_string()))?;
        self.loss.validate().map_err(|e| invalid(e.to_string()))?;
        if self.split.window < 2 {
            return Err(invalid(format!(
                "split_window {} must be at least 2",
                self.split.window
            )));
        }
        if !(self.split.theta_deg > 0.0 && self.split.theta_deg <= 180.0) {
            return Err(invalid(format!(
                "theta_deg {} must lie in (0, 180]",
                self.split.theta_deg
            )));
        }
        if !(self.raster_sigma_deg.is_finite() && self.raster_sigma_deg > 0.0) {
            return Err(invalid(format!(
                "raster_sigma_deg {} must be positive",
                self.raster_sigma_deg
            )));
        }
        if self.fps == 0 {
            return Err(invalid("fps must be positive".into()));
        }
        if self.max_coattention_cells == 0 {
            return Err(invalid("max_coattention_cells must be positive".into()));
        }
        Ok(())
    }
}

/// The resolved configuration in file syntax, one line per key.
impl fmt::Display for ToolkitConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for key in CONFIG_KEYS {
            writeln!(f, "{key} = {}", self.get(key))?;
        }
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<ToolkitConfig, IoFormatError> {
    let mut cfg = ToolkitConfig::default();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(IoFormatError::Parse {
                line,
                detail: format!("expected 'key = value', found '{content}'"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) && CONFIG_KEYS.contains(&key) {
            return Err(IoFormatError::Parse {
                line,
                detail: format!("duplicate key '{key}'"),
            });
        }
        cfg.set(key, value)
            .map_err(|detail| IoFormatError::Parse { line, detail })?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn read_config(path: &Path) -> Result<ToolkitConfig, IoFormatError> {
    parse_config(&std::fs::read_to_string(path).map_err(io_err(path))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse_config("# nothing\n\n").unwrap();
        assert_eq!(cfg, ToolkitConfig::default());
        assert_eq!(cfg.pipeline.blur_ksize, 31);
        assert_eq!(cfg.pipeline.mesh_thickness_px, 5);
        assert_eq!(cfg.filter.td_threshold, 0.4);
        assert_eq!(cfg.loss.lambda, 5.0);
        assert_eq!(cfg.split.theta_deg, 110.0);
    }

    #[test]
    fn printed_config_parses_back() {
        let mut cfg = ToolkitConfig::default();
        cfg.pipeline.clear_hold_s = 1.25;
        cfg.loss.cluster.min_pts = 4;
        cfg.fps = 30;
        let text = cfg.to_string();
        assert_eq!(text.lines().count(), CONFIG_KEYS.len());
        assert_eq!(parse_config(&text).unwrap(), cfg);
    }

    #[test]
    fn values_and_comments() {
        let cfg = parse_config("blur_sigma = 3.5  # softer\n  lambda=2\n").unwrap();
        assert_eq!(cfg.pipeline.blur_sigma, 3.5);
        assert_eq!(cfg.loss.lambda, 2.0);
    }

    #[test]
    fn rejects_unknown_duplicate_and_malformed() {
        let err = |t: &str| match parse_config(t) {
            Err(IoFormatError::Parse { line, .. }) => line,
            other => panic!("{t:?}: {other:?}"),
        };
        assert_eq!(err("fps = 60\nsharpness = 2\n"), 2);
        assert_eq!(err("fps = 60\n\nfps = 30\n"), 3);
        assert_eq!(err("blur_ksize\n"), 1);
        assert_eq!(err("blur_ksize = big\n"), 1);
        assert!(matches!(
            parse_config("blur_ksize = 30\n"),
            Err(IoFormatError::Invalid(_))
        ));
    }
}
