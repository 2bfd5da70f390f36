use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use image::Rgb;
use windb_core::analytics::FixationMap;
use windb_core::io::{load_frame, write_frame, write_gaze_log, write_map, GazeRecord};
use windb_core::Frame;

const W: u32 = 192;
const H: u32 = 96;

fn windb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_windb"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn clip(root: &Path, n: u64, f: impl Fn(u32, u32, u64) -> [u8; 3]) -> PathBuf {
    let dir = root.join("clip");
    std::fs::create_dir_all(&dir).unwrap();
    for i in 0..n {
        write_frame(&dir, i, &Frame::from_fn(W, H, |x, y| Rgb(f(x, y, i)))).unwrap();
    }
    dir
}

fn rec(frame: u64, t_ms: u64, x: f64, y: f64) -> GazeRecord {
    GazeRecord {
        user_id: 1,
        frame_index: frame,
        t_ms,
        x_norm: x,
        y_norm: y,
        valid: true,
    }
}

#[test]
fn erp_star_of_constant_clip_equals_input() {
    let tmp = tempfile::tempdir().unwrap();
    let c = clip(tmp.path(), 2, |_, _, _| [90, 20, 200]);
    let out = tmp.path().join("out");
    let o = windb(&[
        "render",
        "--input-dir",
        s(&c),
        "--out-dir",
        s(&out),
        "--stage",
        "erp-star",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(
        stderr(&o).contains("grid_interval_deg = 30"),
        "config not echoed"
    );
    for i in 0..2 {
        let name = format!("frame_{i:06}.png");
        assert_eq!(
            load_frame(&out.join(&name)).unwrap(),
            load_frame(&c.join(&name)).unwrap()
        );
    }
}

#[test]
fn mesh_stage_zeroes_exactly_the_grid_bands() {
    let tmp = tempfile::tempdir().unwrap();
    let c = clip(tmp.path(), 1, |_, _, _| [200, 100, 50]);
    let out = tmp.path().join("out");
    let o = windb(&[
        "render",
        "--input-dir",
        s(&c),
        "--out-dir",
        s(&out),
        "--stage",
        "mesh",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let f = load_frame(&out.join("frame_000000.png")).unwrap();
    // 16 px patches; 5 px bands centred on the patch borders
    let on_line = |v: u32| matches!(v % 16, 14 | 15 | 0 | 1 | 2);
    let mut zeroed = 0;
    for (x, y, p) in f.enumerate_pixels() {
        let band = on_line(x) || (on_line(y) && (14..=82).contains(&y));
        if band {
            zeroed += 1;
            assert_eq!(p.0, [0, 0, 0], "({x},{y})");
        } else {
            assert_eq!(p.0, [200, 100, 50], "({x},{y})");
        }
    }
    assert_eq!(zeroed, 60 * 96 + 25 * 192 - 60 * 25);
}

#[test]
fn windb_render_matches_simulate_sidecars() {
    let tmp = tempfile::tempdir().unwrap();
    let c = clip(tmp.path(), 8, |x, y, i| [x as u8, y as u8, (i * 20) as u8]);
    let log = tmp.path().join("gaze.csv");
    write_gaze_log(
        &[
            rec(0, 0, 0.5, 0.05),
            rec(3, 50, 0.1, 0.95),
            rec(3, 51, 0.5, 0.5),
        ],
        &log,
    )
    .unwrap();
    let rendered = tmp.path().join("rendered");
    let simulated = tmp.path().join("simulated");
    let o = windb(&[
        "render",
        "--input-dir",
        s(&c),
        "--out-dir",
        s(&rendered),
        "--gaze",
        s(&log),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = windb(&[
        "simulate",
        "--clip-dir",
        s(&c),
        "--gaze",
        s(&log),
        "--out-dir",
        s(&simulated),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("frames rendered: 8"));
    for i in 0..8 {
        let name = format!("frame_{i:06}.json");
        let a = std::fs::read(rendered.join(&name)).unwrap();
        assert_eq!(a, std::fs::read(simulated.join(&name)).unwrap());
        assert!(rendered.join(format!("frame_{i:06}.png")).exists());
    }
    let first = std::fs::read_to_string(rendered.join("frame_000000.json")).unwrap();
    assert!(first.contains("\"C\""), "{first}");
}

#[test]
fn windb_without_gaze_warns_and_holds_blur() {
    let tmp = tempfile::tempdir().unwrap();
    let c = clip(tmp.path(), 2, |x, _, _| [x as u8, 0, 0]);
    let out = tmp.path().join("out");
    let o = windb(&[
        "render",
        "--input-dir",
        s(&c),
        "--out-dir",
        s(&out),
        "--stage",
        "windb",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"));
    let side = std::fs::read_to_string(out.join("frame_000001.json")).unwrap();
    assert_eq!(side.matches("\"B\"").count(), 6, "{side}");
}

#[test]
fn input_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let o = windb(&[
        "render",
        "--input-dir",
        s(tmp.path()),
        "--out-dir",
        s(&tmp.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("error"));
    assert_eq!(windb(&["render", "--bogus"]).status.code(), Some(1));
    assert_eq!(windb(&["frobnicate"]).status.code(), Some(1));
    let cfg = tmp.path().join("bad.cfg");
    std::fs::write(&cfg, "blur_sigma = 5\nwarp_factor = 9\n").unwrap();
    let c = clip(tmp.path(), 1, |_, _, _| [0, 0, 0]);
    let o = windb(&[
        "render",
        "--input-dir",
        s(&c),
        "--out-dir",
        s(tmp.path()),
        "--config",
        s(&cfg),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("warp_factor"), "{}", stderr(&o));
}

#[test]
fn serve_defaults_and_busy_port() {
    let help = stdout(&windb(&["serve", "--help"]));
    assert!(help.contains("[default: 8390]"), "{help}");
    let tmp = tempfile::tempdir().unwrap();
    let c = clip(tmp.path(), 1, |_, _, _| [0, 0, 0]);
    let blocker = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = blocker.local_addr().unwrap().port().to_string();
    let o = windb(&[
        "serve",
        "--port",
        &port,
        "--clip-dir",
        s(&c),
        "--out-dir",
        s(&tmp.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains(&format!("127.0.0.1:{port}")),
        "{}",
        stderr(&o)
    );
}

#[test]
fn split_labels_clips() {
    let tmp = tempfile::tempdir().unwrap();
    // ERP display coordinates: lon = x * 360 - 180
    let trace = |dir: &str, jump_lon: f64| {
        let d = tmp.path().join(dir);
        std::fs::create_dir_all(&d).unwrap();
        let mut recs = Vec::new();
        for f in 0..30u64 {
            let lon = if f < 15 { 0.0 } else { jump_lon };
            for k in 0..3 {
                recs.push(rec(
                    f,
                    f * 17 + k,
                    (lon + 180.0) / 360.0 + k as f64 * 0.002,
                    0.5,
                ));
            }
        }
        let p = d.join("gaze.csv");
        write_gaze_log(&recs, &p).unwrap();
        p
    };
    let blind = trace("jumpy", 120.0);
    let ordinary = trace("calm", 90.0);
    let o = windb(&[
        "analyze",
        "split",
        "--mapping",
        "erp",
        s(&blind),
        s(&ordinary),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("jumpy\tblind\t"), "{out}");
    assert!(lines[1].starts_with("calm\tordinary\t"), "{out}");
}

fn write_maps(dir: &Path, maps: &[FixationMap]) {
    std::fs::create_dir_all(dir).unwrap();
    for (i, m) in maps.iter().enumerate() {
        write_map(m, &dir.join(format!("map_{i:04}.pgm"))).unwrap();
    }
}

fn blob(cx: u32, cy: u32) -> FixationMap {
    let v = (0..32 * 16)
        .map(|i| {
            let (x, y) = (i % 32, i / 32);
            let d2 = f64::from((x - cx as i32).pow(2) + (y - cy as i32).pow(2));
            (-d2 / 8.0).exp()
        })
        .collect();
    FixationMap::new(32, 16, v).unwrap()
}

#[test]
fn metrics_of_a_map_against_itself() {
    let tmp = tempfile::tempdir().unwrap();
    let maps = tmp.path().join("maps");
    write_maps(&maps, &[blob(10, 8), blob(20, 5)]);
    let o = windb(&[
        "analyze",
        "metrics",
        "--pred",
        s(&maps),
        "--gt",
        s(&maps),
        "--json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!((v["CC"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((v["SIM"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(v["AUC-J"].is_null());
    let o = windb(&["analyze", "metrics", "--pred", s(&maps), "--gt", s(&maps)]);
    let table = stdout(&o);
    assert!(table.lines().next().unwrap().contains("AUC-J"));
    assert_eq!(table.lines().count(), 4, "{table}");
}

#[test]
fn loss_is_zero_when_prediction_matches_ground_truth() {
    let tmp = tempfile::tempdir().unwrap();
    let maps = tmp.path().join("maps");
    write_maps(&maps, &[blob(10, 8), blob(10, 8), blob(10, 8)]);
    let log = tmp.path().join("gaze.csv");
    write_gaze_log(&[], &log).unwrap();
    let o = windb(&[
        "analyze",
        "loss",
        "--pred",
        s(&maps),
        "--gt",
        s(&maps),
        "--gaze",
        s(&log),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 0.0);
    let o = windb(&[
        "analyze",
        "loss",
        "--pred",
        s(&maps),
        "--gt",
        s(&maps),
        "--gaze",
        s(&log),
        "--offset",
        "16",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn spots_report_centroids_and_weights() {
    let tmp = tempfile::tempdir().unwrap();
    let maps = tmp.path().join("maps");
    write_maps(&maps, &[blob(8, 8), blob(24, 8)]);
    let o = windb(&["analyze", "spots", "--maps", s(&maps)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let omega_line = out.lines().last().unwrap();
    let omega: f64 = omega_line.split('\t').nth(2).unwrap().parse().unwrap();
    // centroids share a latitude and differ by 180 degrees of longitude,
    // so the great-circle path runs over the pole: pi - 2|lat|
    let lat: f64 = out
        .lines()
        .nth(1)
        .unwrap()
        .split('\t')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    let expected = std::f64::consts::PI - 2.0 * lat.to_radians().abs();
    assert!((omega - expected).abs() < 1e-6, "{out}");
    assert!(out.lines().nth(1).unwrap().starts_with("0\t"));
}
