use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::Subcommand;
use windb_core::analytics::loss::{gt_shift_weights, pred_shift_weights};
use windb_core::analytics::split::max_window_distance;
use windb_core::analytics::spot::shift_weight_or_zero;
use windb_core::analytics::{
    classify_clip, extract_spot, fixation_cell, frame_centers, shifting_loss, FixationMap,
    GroundTruthFrame, MetricReport,
};
use windb_core::geometry::SphericalCoord;
use windb_core::io::{read_gaze_log, read_map};

use crate::util::{fixations_by_frame, input_error, list_maps, load_config, MappingArgs};
use crate::ConfigArg;

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Label clips blind or ordinary from their gaze logs.
    Split(SplitArgs),
    /// AUC-J / SIM / CC / NSS of predicted maps against ground truth.
    Metrics(MetricsArgs),
    /// Fixation-shifting loss of a predicted sequence.
    Loss(LossArgs),
    /// Per-frame spots and shift weights of a map sequence.
    Spots(SpotsArgs),
}

#[derive(Debug, clap::Args)]
pub struct SplitArgs {
    /// Gaze logs, one per clip.
    #[arg(required = true)]
    logs: Vec<PathBuf>,
    #[command(flatten)]
    mapping: MappingArgs,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Debug, clap::Args)]
pub struct MetricsArgs {
    /// Predicted map, or a directory of per-frame maps.
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth map, or a directory with the same frame numbers.
    #[arg(long)]
    gt: PathBuf,
    /// Gaze log providing fixations for AUC-J and NSS.
    #[arg(long)]
    fixations: Option<PathBuf>,
    #[command(flatten)]
    mapping: MappingArgs,
    /// Print the mean scores as a JSON object keyed by metric name.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Debug, clap::Args)]
pub struct LossArgs {
    /// Directory of predicted per-frame maps.
    #[arg(long)]
    pred: PathBuf,
    /// Directory of ground-truth maps with the same frame numbers.
    #[arg(long)]
    gt: PathBuf,
    /// Gaze log behind the ground truth, clustered per frame.
    #[arg(long)]
    gaze: PathBuf,
    /// Frame distance `m` of the shift weights.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=15))]
    offset: u32,
    #[command(flatten)]
    mapping: MappingArgs,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Debug, clap::Args)]
pub struct SpotsArgs {
    /// Directory of per-frame maps.
    #[arg(long)]
    maps: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=15))]
    offset: u32,
    #[command(flatten)]
    config: ConfigArg,
}

pub fn run(cmd: AnalyzeCommand) -> Result<()> {
    match cmd {
        AnalyzeCommand::Split(a) => split(a),
        AnalyzeCommand::Metrics(a) => metrics(a),
        AnalyzeCommand::Loss(a) => loss(a),
        AnalyzeCommand::Spots(a) => spots(a),
    }
}

fn clip_name(log: &Path) -> String {
    let stem = log
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    if stem == "gaze" {
        if let Some(dir) = log.parent().and_then(Path::file_name) {
            return dir.to_string_lossy().into_owned();
        }
    }
    stem
}

fn split(args: SplitArgs) -> Result<()> {
    let cfg = load_config(args.config.config.as_deref())?;
    let mapping = args.mapping.build(&cfg)?;
    for log in &args.logs {
        let by_frame = fixations_by_frame(&read_gaze_log(log)?, &mapping)?;
        let frames = by_frame.keys().next_back().map_or(0, |&k| k + 1);
        let per_frame: Vec<Vec<SphericalCoord>> = (0..frames)
            .map(|f| by_frame.get(&f).cloned().unwrap_or_default())
            .collect();
        let centers = frame_centers(&per_frame, &cfg.loss.cluster)?;
        let label = classify_clip(&centers, &cfg.split)
            .map_err(|e| input_error(format!("{}: {e}", log.display())))?;
        let max = max_window_distance(&centers, cfg.split.window)?;
        println!("{}\t{label}\t{:.3}", clip_name(log), max.to_degrees());
    }
    Ok(())
}

/// `(label, pred, gt, frame)` triples; `frame` is `None` for a single pair.
fn map_pairs(pred: &Path, gt: &Path) -> Result<Vec<(String, PathBuf, PathBuf, Option<u64>)>> {
    if !pred.is_dir() {
        let label = pred
            .file_name()
            .map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        return Ok(vec![(label, pred.to_path_buf(), gt.to_path_buf(), None)]);
    }
    let gts = list_maps(gt)?;
    list_maps(pred)?
        .into_iter()
        .map(|(n, p)| {
            let g = gts.iter().find(|(m, _)| *m == n).ok_or_else(|| {
                input_error(format!(
                    "no ground-truth map for frame {n} in {}",
                    gt.display()
                ))
            })?;
            Ok((n.to_string(), p, g.1.clone(), Some(n)))
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"))
}

fn metrics(args: MetricsArgs) -> Result<()> {
    let cfg = load_config(args.config.config.as_deref())?;
    let fixations = match &args.fixations {
        Some(log) => Some(fixations_by_frame(
            &read_gaze_log(log)?,
            &args.mapping.build(&cfg)?,
        )?),
        None => None,
    };
    let mut rows = Vec::new();
    for (label, pred_path, gt_path, frame) in map_pairs(&args.pred, &args.gt)? {
        let pred = read_map(&pred_path)?;
        let gt = read_map(&gt_path)?;
        let cells: Option<Vec<(u32, u32)>> = fixations.as_ref().map(|by_frame| {
            let dirs: Vec<&SphericalCoord> = match frame {
                Some(f) => by_frame.get(&f).into_iter().flatten().collect(),
                None => by_frame.values().flatten().collect(),
            };
            dirs.into_iter()
                .map(|d| fixation_cell(*d, pred.width(), pred.height()))
                .collect()
        });
        let report = MetricReport::evaluate(&pred, &gt, cells.as_deref())?;
        rows.push((label, report));
    }
    let reports: Vec<MetricReport> = rows.iter().map(|r| r.1).collect();
    let mean = MetricReport::mean(&reports).ok_or_else(|| input_error("no map pairs"))?;
    if args.json {
        println!("{}", serde_json::to_string(&mean)?);
        return Ok(());
    }
    println!(
        "{:<16} {:>10} {:>10} {:>10} {:>10}",
        "map", "AUC-J", "SIM", "CC", "NSS"
    );
    let print = |label: &str, r: &MetricReport| {
        println!(
            "{label:<16} {:>10} {:>10.6} {:>10.6} {:>10}",
            fmt_opt(r.auc_judd),
            r.sim,
            r.cc,
            fmt_opt(r.nss)
        );
    };
    for (label, r) in &rows {
        print(label, r);
    }
    if rows.len() > 1 {
        print("mean", &mean);
    }
    Ok(())
}

fn read_sequence(dir: &Path) -> Result<Vec<(u64, FixationMap)>> {
    list_maps(dir)?
        .into_iter()
        .map(|(n, p)| Ok((n, read_map(&p)?)))
        .collect()
}

fn loss(args: LossArgs) -> Result<()> {
    let cfg = load_config(args.config.config.as_deref())?;
    let mapping = args.mapping.build(&cfg)?;
    let by_frame = fixations_by_frame(&read_gaze_log(&args.gaze)?, &mapping)?;
    let pred = read_sequence(&args.pred)?;
    let gt = read_sequence(&args.gt)?;
    let pred_frames: Vec<u64> = pred.iter().map(|p| p.0).collect();
    let gt_frames: Vec<u64> = gt.iter().map(|g| g.0).collect();
    if pred_frames != gt_frames {
        return Err(input_error(
            "predicted and ground-truth frame numbers differ",
        ));
    }
    let gt_seq: Vec<GroundTruthFrame> = gt
        .into_iter()
        .map(|(n, map)| GroundTruthFrame {
            map,
            fixations: by_frame.get(&n).cloned().unwrap_or_default(),
        })
        .collect();
    let pred_seq: Vec<FixationMap> = pred.into_iter().map(|p| p.1).collect();
    let m = args.offset as usize;
    let omega = pred_shift_weights(&pred_seq, m, &cfg.filter)?;
    let omega_star = gt_shift_weights(&gt_seq, m, &cfg.loss.cluster)?;
    let value = shifting_loss(&pred_seq, &gt_seq, &omega, &omega_star, &cfg.loss)?;
    println!("{value}");
    Ok(())
}

fn spots(args: SpotsArgs) -> Result<()> {
    let cfg = load_config(args.config.config.as_deref())?;
    let seq = read_sequence(&args.maps)?;
    let spots = seq
        .iter()
        .map(|(_, map)| extract_spot(map.as_grid(), &cfg.filter))
        .collect::<Result<Vec<_>, _>>()?;
    println!("frame\tlat_deg\tlon_deg\tmean_response\tcells");
    for ((n, _), spot) in seq.iter().zip(&spots) {
        match spot {
            Some(s) => println!(
                "{n}\t{:.6}\t{:.6}\t{:.6}\t{}",
                s.centroid.lat().to_degrees(),
                s.centroid.lon().to_degrees(),
                s.mean_response,
                s.cells.len()
            ),
            None => println!("{n}\t-\t-\t-\t0"),
        }
    }
    println!();
    println!("frame\tframe_m\tomega_rad");
    let m = args.offset as usize;
    for t in 0..spots.len().saturating_sub(m) {
        let w = shift_weight_or_zero(spots[t].as_ref(), spots[t + m].as_ref());
        println!("{}\t{}\t{w:.9}", seq[t].0, seq[t + m].0);
    }
    Ok(())
}
