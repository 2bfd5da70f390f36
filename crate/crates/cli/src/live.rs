use std::path::PathBuf;

use anyhow::{Context, Result};
use windb_core::io::{read_gaze_log, write_frame};
use windb_service::{
    bind, replay, serve as serve_session, ServeOptions, Session, SessionConfig, DEFAULT_PORT,
};

use crate::util::load_config;
use crate::ConfigArg;

#[derive(Debug, clap::Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = DEFAULT_PORT)]
    port: u16,
    /// Directory of ERP frames to play.
    #[arg(long)]
    clip_dir: PathBuf,
    /// Receives the gaze log and the per-frame state sidecars.
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, default_value_t = 0)]
    user_id: u32,
    /// Start playing without waiting for a play control.
    #[arg(long)]
    autoplay: bool,
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    #[arg(long)]
    clip_dir: PathBuf,
    /// Recorded gaze log to replay.
    #[arg(long)]
    gaze: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, default_value_t = 0)]
    user_id: u32,
    /// Also write the composed frames.
    #[arg(long)]
    frames: bool,
}

pub fn serve(args: ServeArgs) -> Result<()> {
    let toolkit = load_config(args.config.config.as_deref())?;
    let session = Session::start(
        &args.clip_dir,
        SessionConfig {
            toolkit,
            out_dir: args.out_dir,
            user_id: args.user_id,
        },
    )?;
    let rt = tokio::runtime::Runtime::new().context("starting the async runtime")?;
    let summary = rt.block_on(async {
        let listener = bind(args.port).await?;
        let addr = listener.local_addr().context("reading the bound address")?;
        eprintln!(
            "serving {} ({} frames at {} fps) on ws://{addr}/ws",
            session.clip_id(),
            session.frame_count(),
            session.fps()
        );
        serve_session(
            session,
            listener,
            ServeOptions {
                autoplay: args.autoplay,
            },
        )
        .await
        .map_err(anyhow::Error::from)
    })?;
    println!(
        "frames rendered: {}\ngaze samples: {}\ngaze log: {}",
        summary.frames_rendered,
        summary.gaze_samples,
        summary.gaze_log.display()
    );
    Ok(())
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let toolkit = load_config(args.config.config.as_deref())?;
    let records = read_gaze_log(&args.gaze)?;
    let out_dir = args.out_dir.clone();
    let s = replay(
        &args.clip_dir,
        &records,
        SessionConfig {
            toolkit,
            out_dir: args.out_dir,
            user_id: args.user_id,
        },
        |out| {
            if args.frames {
                write_frame(&out_dir, out.index, &out.raster)?;
            }
            Ok(())
        },
    )?;
    let dropped = records.len() - s.recording().len();
    if dropped > 0 {
        eprintln!("warning: {dropped} gaze samples fall after the last frame and were dropped");
    }
    println!(
        "frames rendered: {}\ngaze samples: {}\nsidecars: {}",
        s.frame_count(),
        s.recording().len(),
        out_dir.display()
    );
    Ok(())
}
