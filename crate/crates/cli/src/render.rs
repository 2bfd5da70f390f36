use std::path::PathBuf;

use anyhow::Result;
use rayon::prelude::*;
use windb_core::io::{
    list_frames, load_frame, read_gaze_log, write_frame, write_sidecar, StateSidecar,
};
use windb_core::pipeline::{Stage, WinDbRenderer};
use windb_service::{replay, SessionConfig};

use crate::util::{create_dir, load_config};
use crate::ConfigArg;

#[derive(Debug, clap::Args)]
pub struct RenderArgs {
    /// Directory of ERP frames (`*NNN.png`).
    #[arg(long)]
    input_dir: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
    /// Recorded gaze log driving the auxiliary windows (stage `windb`).
    #[arg(long)]
    gaze: Option<PathBuf>,
    #[arg(long, default_value = "windb", value_parser = |s: &str| s.parse::<Stage>())]
    stage: Stage,
    /// Gaze log user id recorded in the replay copy of the log.
    #[arg(long, default_value_t = 0)]
    user_id: u32,
}

pub fn run(args: RenderArgs) -> Result<()> {
    let cfg = load_config(args.config.config.as_deref())?;
    create_dir(&args.out_dir)?;
    if args.stage == Stage::WinDb {
        if let Some(gaze) = &args.gaze {
            let records = read_gaze_log(gaze)?;
            let session_cfg = SessionConfig {
                toolkit: cfg,
                out_dir: args.out_dir.clone(),
                user_id: args.user_id,
            };
            let s = replay(&args.input_dir, &records, session_cfg, |out| {
                write_frame(&args.out_dir, out.index, &out.raster)?;
                Ok(())
            })?;
            println!(
                "rendered {} frames (stage windb, {} gaze samples)",
                s.frame_count(),
                records.len()
            );
            return Ok(());
        }
        eprintln!("warning: no --gaze given; every auxiliary window stays blurred");
    } else if args.gaze.is_some() {
        eprintln!("warning: --gaze only affects stage windb; ignored");
    }

    let frames = list_frames(&args.input_dir)?;
    let first = load_frame(&frames[0])?;
    let renderer = WinDbRenderer::new(first.width(), first.height(), &cfg.pipeline)?;
    let states = renderer.layout().initial_states();
    frames
        .par_iter()
        .enumerate()
        .try_for_each(|(i, path)| -> Result<()> {
            let erp = load_frame(path)?;
            let out = renderer.render_stage(&erp, args.stage, &states)?;
            write_frame(&args.out_dir, i as u64, &out)?;
            if args.stage == Stage::WinDb {
                write_sidecar(&args.out_dir, &StateSidecar::new(i as u64, &states))?;
            }
            Ok(())
        })?;
    println!("rendered {} frames (stage {})", frames.len(), args.stage);
    Ok(())
}
