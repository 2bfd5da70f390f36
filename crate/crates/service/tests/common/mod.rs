#![allow(dead_code)]

use std::path::{Path, PathBuf};

use windb_core::io::{write_frame, ToolkitConfig};
use windb_core::Frame;
use windb_service::SessionConfig;

pub const W: u32 = 192;
pub const H: u32 = 96;

/// Writes `n` gradient frames and returns the clip directory.
pub fn make_clip(root: &Path, n: u64) -> PathBuf {
    let dir = root.join("clip01");
    std::fs::create_dir_all(&dir).unwrap();
    for i in 0..n {
        let f = Frame::from_fn(W, H, |x, y| {
            image::Rgb([
                (x * 255 / W) as u8,
                (y * 255 / H) as u8,
                (i * 13 % 256) as u8,
            ])
        });
        write_frame(&dir, i, &f).unwrap();
    }
    dir
}

pub fn config(out_dir: &Path) -> SessionConfig {
    SessionConfig {
        toolkit: ToolkitConfig::default(),
        out_dir: out_dir.to_path_buf(),
        user_id: 7,
    }
}

/// Normalised display point inside auxiliary window `id` (0..3 north,
/// 3..6 south).
pub fn aux_point(id: usize) -> (f64, f64) {
    let x = (id % 3) as f64 / 3.0 + 1.0 / 6.0;
    let y = if id < 3 { 1.0 / 12.0 } else { 1.0 - 1.0 / 12.0 };
    (x, y)
}

/// Normalised display point on the equator, outside every window.
pub const PLAIN_POINT: (f64, f64) = (0.3, 0.5);
