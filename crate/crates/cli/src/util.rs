use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use windb_core::analytics::AnalyticsError;
use windb_core::geometry::{build_grid, GridSpec, SphericalCoord};
use windb_core::io::{read_config, DisplayMapping, GazeRecord, IoFormatError, ToolkitConfig};
use windb_core::pipeline::{AuxLayout, PipelineError};
use windb_service::SessionError;

/// A problem with what the user supplied.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn input_error(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    let is_input = err.chain().any(|c| {
        c.is::<InputError>()
            || c.is::<IoFormatError>()
            || c.is::<AnalyticsError>()
            || c.is::<PipelineError>()
            || c.is::<SessionError>()
    });
    if is_input {
        1
    } else {
        2
    }
}

/// Loads the config file (or the defaults) and echoes it to stderr.
pub fn load_config(path: Option<&Path>) -> Result<ToolkitConfig> {
    let cfg = match path {
        Some(p) => read_config(p)?,
        None => ToolkitConfig::default(),
    };
    cfg.validate()?;
    eprintln!("# resolved config");
    eprint!("{cfg}");
    Ok(cfg)
}

/// How gaze logs map to viewing directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MappingKind {
    /// Gaze recorded on a composed WinDB display.
    Windb,
    /// Gaze recorded directly on the ERP frame.
    Erp,
}

#[derive(Debug, clap::Args)]
pub struct MappingArgs {
    /// Display layout the gaze was recorded on.
    #[arg(long, value_enum, default_value = "windb")]
    pub mapping: MappingKind,
    /// Display raster size, `WIDTHxHEIGHT`.
    #[arg(long, default_value = "768x384", value_parser = parse_dims)]
    pub display: (u32, u32),
}

impl MappingArgs {
    pub fn build(&self, cfg: &ToolkitConfig) -> Result<DisplayMapping> {
        Ok(match self.mapping {
            MappingKind::Erp => DisplayMapping::Erp,
            MappingKind::Windb => {
                let (w, h) = self.display;
                let grid = build_grid(
                    GridSpec::new(w, h, cfg.pipeline.grid_interval_deg)
                        .map_err(|e| input_error(format!("display {w}x{h}: {e}")))?,
                )
                .map_err(|e| input_error(format!("display {w}x{h}: {e}")))?;
                let layout = AuxLayout::standard(w, h, &cfg.pipeline)?;
                DisplayMapping::WinDb { grid, layout }
            }
        })
    }
}

pub fn parse_dims(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got '{s}'"))?;
    let w: u32 = w
        .trim()
        .parse()
        .map_err(|_| format!("bad width in '{s}'"))?;
    let h: u32 = h
        .trim()
        .parse()
        .map_err(|_| format!("bad height in '{s}'"))?;
    if w == 0 || h == 0 {
        return Err(format!("empty display '{s}'"));
    }
    Ok((w, h))
}

/// Valid fixation directions per frame index.
pub fn fixations_by_frame(
    records: &[GazeRecord],
    mapping: &DisplayMapping,
) -> Result<BTreeMap<u64, Vec<SphericalCoord>>> {
    let mut out: BTreeMap<u64, Vec<SphericalCoord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.valid) {
        out.entry(r.frame_index)
            .or_default()
            .push(mapping.direction(r.x_norm, r.y_norm)?);
    }
    Ok(out)
}

/// Trailing decimal digits of a file stem, e.g. `map_000012.pgm` → 12.
pub fn trailing_number(path: &Path) -> Option<u64> {
    let stem = path.file_stem()?.to_str()?;
    let digits = stem.len() - stem.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    stem[stem.len() - digits..].parse().ok()
}

/// Map files (`.pgm` / `.pnm`) of a directory, ordered by frame number.
pub fn list_maps(dir: &Path) -> Result<Vec<(u64, PathBuf)>> {
    let entries = std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?;
    let mut out = Vec::new();
    for e in entries {
        let path = e
            .with_context(|| format!("reading {}", dir.display()))?
            .path();
        let is_map = path
            .extension()
            .and_then(|x| x.to_str())
            .is_some_and(|x| x.eq_ignore_ascii_case("pgm") || x.eq_ignore_ascii_case("pnm"));
        if !is_map {
            continue;
        }
        let n = trailing_number(&path).ok_or_else(|| {
            input_error(format!("{}: map name lacks a frame number", path.display()))
        })?;
        out.push((n, path));
    }
    if out.is_empty() {
        return Err(input_error(format!("{}: no .pgm/.pnm maps", dir.display())));
    }
    out.sort();
    if let Some(w) = out.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(input_error(format!(
            "{} and {} share frame number {}",
            w[0].1.display(),
            w[1].1.display(),
            w[0].0
        )));
    }
    Ok(out)
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|source| IoFormatError::Io {
            path: dir.to_path_buf(),
            source,
        })
        .map_err(Into::into)
}

/// Joins the error chain with `: `, skipping causes the previous message
/// already ends with.
pub fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.ends_with(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}
