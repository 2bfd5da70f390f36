//! Numbered PNG frame directories.
//!
//! Input frames are any `*.png` whose file stem ends in digits
//! (`clip_0007.png`, `12.png`); they are ordered by that number. Output
//! frames are written as `frame_000000.png`, `frame_000001.png`, ...

use std::path::{Path, PathBuf};

use crate::io::{io_err, IoFormatError};
use crate::Frame;

fn frame_number(path: &Path) -> Option<u64> {
    if !path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
    {
        return None;
    }
    let stem = path.file_stem()?.to_str()?;
    let digits = stem.len() - stem.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    stem[stem.len() - digits..].parse().ok()
}

/// Numbered frames of `dir` in frame order.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>, IoFormatError> {
    let mut frames = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if let Some(n) = frame_number(&path) {
            frames.push((n, path));
        }
    }
    if frames.is_empty() {
        return Err(IoFormatError::MissingFrames(dir.to_path_buf()));
    }
    frames.sort();
    Ok(frames.into_iter().map(|(_, p)| p).collect())
}

pub fn load_frame(path: &Path) -> Result<Frame, IoFormatError> {
    let img = image::open(path).map_err(|e| IoFormatError::Image {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    Ok(img.into_rgb8())
}

pub fn frame_file_name(index: u64) -> String {
    format!("frame_{index:06}.png")
}

pub fn encode_png(frame: &Frame) -> Result<Vec<u8>, IoFormatError> {
    let mut out = std::io::Cursor::new(Vec::new());
    frame
        .write_to(&mut out, image::ImageFormat::Png)
        .map_err(|e| IoFormatError::Invalid(e.to_string()))?;
    Ok(out.into_inner())
}

/// Writes `frame` as `dir/frame_{index:06}.png` and returns the path.
pub fn write_frame(dir: &Path, index: u64, frame: &Frame) -> Result<PathBuf, IoFormatError> {
    let path = dir.join(frame_file_name(index));
    std::fs::write(&path, encode_png(frame)?).map_err(io_err(&path))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    #[test]
    fn numeric_order_and_filtering() {
        let dir = tempfile::tempdir().unwrap();
        let f = Frame::from_pixel(4, 2, Rgb([1, 2, 3]));
        for name in ["f10.png", "f9.png", "f100.png"] {
            f.save(dir.path().join(name)).unwrap();
        }
        std::fs::write(dir.path().join("notes.txt"), "x").unwrap();
        std::fs::write(dir.path().join("cover.png"), "x").unwrap();
        let names: Vec<_> = list_frames(dir.path())
            .unwrap()
            .iter()
            .map(|p| p.file_name().unwrap().to_str().unwrap().to_string())
            .collect();
        assert_eq!(names, ["f9.png", "f10.png", "f100.png"]);
    }

    #[test]
    fn empty_dir_is_missing_frames() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            list_frames(dir.path()),
            Err(IoFormatError::MissingFrames(_))
        ));
    }

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let f = Frame::from_fn(5, 3, |x, y| Rgb([x as u8 * 40, y as u8 * 80, 7]));
        let p = write_frame(dir.path(), 3, &f).unwrap();
        assert!(p.ends_with("frame_000003.png"));
        assert_eq!(load_frame(&p).unwrap(), f);
    }
}
