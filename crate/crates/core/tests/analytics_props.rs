use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use windb_core::analytics::loss::gt_spot;
use windb_core::analytics::{
    build_gt_star, classify_clip, cluster_fixations, coattention_enhance, extract_spot,
    fixation_cell, kl_divergence, lightup, metric_auc_judd, metric_cc, metric_nss, metric_sim,
    rasterize_fixation_map, shifting_loss, ClipLabel, ClusterConfig, FeatureGrid, FilterConfig,
    FixationMap, GazeSample, GroundTruthFrame, LossConfig, SplitConfig,
};
use windb_core::geometry::{spherical_distance, SphericalCoord};

fn random_grid(rng: &mut ChaCha8Rng, w: u32, h: u32) -> FeatureGrid {
    FeatureGrid::from_fn(w, h, |_, _| rng.random_range(0.0..1.0)).unwrap()
}

/// Components of the thresholded grid by repeated relaxation of labels.
fn oracle_spot(g: &FeatureGrid, td: f64) -> Option<Vec<(u32, u32)>> {
    let (w, h) = (g.width() as usize, g.height() as usize);
    let max = g.values().iter().copied().fold(f64::MIN, f64::max);
    if max <= 0.0 {
        return None;
    }
    let keep: Vec<bool> = g
        .values()
        .iter()
        .map(|&v| v > 0.0 && v >= td * max)
        .collect();
    let mut label: Vec<usize> = (0..w * h).collect();
    loop {
        let mut changed = false;
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if !keep[i] {
                    continue;
                }
                let mut nb = vec![y * w + (x + 1) % w, y * w + (x + w - 1) % w];
                if y > 0 {
                    nb.push(i - w);
                }
                if y + 1 < h {
                    nb.push(i + w);
                }
                for j in nb {
                    if keep[j] && label[j] < label[i] {
                        label[i] = label[j];
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut best: Option<(f64, usize)> = None;
    let mut roots: Vec<usize> = (0..w * h).filter(|&i| keep[i] && label[i] == i).collect();
    roots.sort_unstable();
    for root in roots {
        let members: Vec<f64> = (0..w * h)
            .filter(|&i| keep[i] && label[i] == root)
            .map(|i| g.values()[i])
            .collect();
        let mean = members.iter().sum::<f64>() / members.len() as f64;
        if best.is_none_or(|(m, _)| mean > m) {
            best = Some((mean, root));
        }
    }
    let (_, root) = best?;
    Some(
        (0..w * h)
            .filter(|&i| keep[i] && label[i] == root)
            .map(|i| ((i % w) as u32, (i / w) as u32))
            .collect(),
    )
}

#[test]
fn spot_matches_flood_fill_oracle_on_500_grids() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg = FilterConfig { td_threshold: 0.4 };
    let mut mismatches = 0;
    for _ in 0..500 {
        let g = random_grid(&mut rng, 16, 16);
        let got = extract_spot(&g, &cfg).unwrap().map(|s| s.cells);
        if got != oracle_spot(&g, 0.4) {
            mismatches += 1;
        }
    }
    assert_eq!(mismatches, 0);
}

fn dense_coattention(a: &FeatureGrid, b: &FeatureGrid) -> (Vec<f64>, Vec<f64>) {
    let n = a.values().len();
    let mut m = DMatrix::<f64>::zeros(n, 2);
    for i in 0..n {
        m[(i, 0)] = a.values()[i];
        m[(i, 1)] = b.values()[i];
    }
    let mut s = &m * m.transpose();
    for i in 0..n {
        let mut row = s.row_mut(i);
        let mx = row.max();
        row.apply(|v| *v = (*v - mx).exp());
        let z = row.sum();
        row /= z;
    }
    let att = &s * &m;
    let sig = att.map(|v| 1.0 / (1.0 + (-v).exp()));
    let out = m.component_mul(&sig);
    (
        out.column(0).iter().copied().collect(),
        out.column(1).iter().copied().collect(),
    )
}

#[test]
fn coattention_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for size in [2u32, 8] {
        for _ in 0..50 {
            let a = FeatureGrid::from_fn(size, size, |_, _| rng.random_range(-3.0..3.0)).unwrap();
            let b = FeatureGrid::from_fn(size, size, |_, _| rng.random_range(-3.0..3.0)).unwrap();
            let (x, y) = coattention_enhance(&a, &b, 16_384).unwrap();
            assert_eq!(
                (x.width(), x.height(), y.width(), y.height()),
                (size, size, size, size)
            );
            let (ox, oy) = dense_coattention(&a, &b);
            for (got, want) in x.values().iter().zip(&ox).chain(y.values().iter().zip(&oy)) {
                assert!((got - want).abs() < 1e-9, "{got} {want}");
            }
        }
    }
}

fn coord() -> impl Strategy<Value = SphericalCoord> {
    (-FRAC_PI_2..=FRAC_PI_2, -PI..PI).prop_map(|(lat, lon)| SphericalCoord::new(lat, lon).unwrap())
}

fn clustered_points() -> impl Strategy<Value = Vec<SphericalCoord>> {
    prop::collection::vec((0usize..3, -8.0f64..8.0, -8.0f64..8.0), 0..40).prop_map(|v| {
        let centres = [(0.0, 0.0), (40.0, 100.0), (-60.0, -170.0)];
        v.into_iter()
            .map(|(c, dlat, dlon)| {
                let (lat, lon) = centres[c];
                SphericalCoord::from_degrees(lat + dlat, lon + dlon).unwrap()
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dbscan_matches_transitive_closure(
        pts in prop_oneof![clustered_points(), prop::collection::vec(coord(), 0..30)],
        eps in 2.0f64..15.0,
        min_pts in 1usize..5,
    ) {
        let cfg = ClusterConfig { eps_deg: eps, min_pts };
        let c = cluster_fixations(&pts, &cfg).unwrap();
        let n = pts.len();
        let near = |i: usize, j: usize| spherical_distance(pts[i], pts[j]) <= eps.to_radians();
        let core: Vec<bool> = (0..n).map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_pts).collect();
        prop_assert_eq!(&c.core, &core);
        // reachability between core points by closure
        let mut reach = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                reach[i][j] = core[i] && core[j] && near(i, j);
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if core[i] && core[j] {
                    prop_assert_eq!(c.labels[i] == c.labels[j], reach[i][j], "{} {}", i, j);
                }
            }
            if !core[i] {
                let any_core = (0..n).any(|j| core[j] && near(i, j));
                match c.labels[i] {
                    None => prop_assert!(!any_core),
                    Some(id) => prop_assert!((0..n).any(|j| core[j] && near(i, j) && c.labels[j] == Some(id))),
                }
            } else {
                prop_assert!(c.labels[i].is_some());
            }
        }
        let total: usize = c.clusters.iter().map(Vec::len).sum();
        prop_assert_eq!(total + c.noise().count(), n);
    }

    #[test]
    fn metric_bounds(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = FixationMap::from_grid(random_grid(&mut rng, 12, 6)).unwrap();
        let g = FixationMap::from_grid(random_grid(&mut rng, 12, 6)).unwrap();
        let fix: Vec<(u32, u32)> = (0..rng.random_range(1..10)).map(|_| (rng.random_range(0..12), rng.random_range(0..6))).collect();
        let sim = metric_sim(&p, &g).unwrap();
        let cc = metric_cc(&p, &g).unwrap();
        let auc = metric_auc_judd(&p, &fix).unwrap();
        let nss = metric_nss(&p, &fix).unwrap();
        prop_assert!((0.0..=1.0).contains(&sim));
        prop_assert!((-1.0..=1.0).contains(&cc));
        prop_assert!((0.0..=1.0).contains(&auc));
        prop_assert!(nss.is_finite());
        prop_assert!((metric_cc(&g, &p).unwrap() - cc).abs() < 1e-12);
        prop_assert!((metric_sim(&g, &p).unwrap() - sim).abs() < 1e-12);
    }

    #[test]
    fn lightup_scales_exactly_inside_the_spot(seed in any::<u64>(), omega in 0.0f64..PI) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_grid(&mut rng, 10, 5);
        let spot = extract_spot(&g, &FilterConfig::default()).unwrap().unwrap();
        let lit = lightup(&g, &spot, omega).unwrap();
        for y in 0..5 {
            for x in 0..10 {
                let want = if spot.contains(x, y) { g.get(x, y) * (1.0 + omega) } else { g.get(x, y) };
                prop_assert_eq!(lit.get(x, y), want);
            }
        }
    }

    #[test]
    fn kl_of_a_map_with_itself_is_zero(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = FixationMap::from_grid(random_grid(&mut rng, 9, 4)).unwrap();
        prop_assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn loss_is_zero_at_the_target_and_linear_in_lambda(seed in any::<u64>(), lambda in 0.0f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = LossConfig { lambda, ..LossConfig::default() };
        let frames: Vec<GroundTruthFrame> = (0..4)
            .map(|_| {
                let lat = rng.random_range(-60.0..60.0);
                let lon = rng.random_range(-170.0..170.0);
                let fixations: Vec<SphericalCoord> = (0..5)
                    .map(|_| SphericalCoord::from_degrees(lat + rng.random_range(-3.0..3.0), lon + rng.random_range(-3.0..3.0)).unwrap())
                    .collect();
                GroundTruthFrame { map: FixationMap::from_grid(random_grid(&mut rng, 16, 8)).unwrap(), fixations }
            })
            .collect();
        let omega_star: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..PI)).collect();
        let preds: Vec<FixationMap> = frames
            .iter()
            .enumerate()
            .map(|(t, g)| build_gt_star(g, omega_star.get(t).copied().unwrap_or(0.0), &cfg.cluster).unwrap())
            .collect();
        prop_assert_eq!(shifting_loss(&preds, &frames, &omega_star, &omega_star, &cfg).unwrap(), 0.0);

        let omega: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..PI)).collect();
        let other: Vec<FixationMap> = (0..4).map(|_| FixationMap::from_grid(random_grid(&mut rng, 16, 8)).unwrap()).collect();
        let base = shifting_loss(&other, &frames, &omega, &omega_star, &LossConfig { lambda: 0.0, ..cfg }).unwrap();
        let mse: f64 = omega.iter().zip(&omega_star).map(|(a, b)| (a - b) * (a - b)).sum();
        prop_assert_eq!(shifting_loss(&other, &frames, &omega, &omega_star, &cfg).unwrap(), base + lambda * mse);
    }

    #[test]
    fn extending_a_blind_clip_keeps_it_blind(
        trace in prop::collection::vec(coord(), 15..40),
        extra in prop::collection::vec(coord(), 1..10),
        front in any::<bool>(),
    ) {
        let cfg = SplitConfig::default();
        if classify_clip(&trace, &cfg).unwrap() == ClipLabel::Blind {
            let longer: Vec<SphericalCoord> = if front {
                extra.iter().chain(&trace).copied().collect()
            } else {
                trace.iter().chain(&extra).copied().collect()
            };
            prop_assert_eq!(classify_clip(&longer, &cfg).unwrap(), ClipLabel::Blind);
        }
    }
}

#[test]
fn gt_spot_covers_every_member() {
    let fixations: Vec<SphericalCoord> = (0..6)
        .map(|k| SphericalCoord::from_degrees(20.0 + f64::from(k), 45.0 - f64::from(k)).unwrap())
        .collect();
    let gt = GroundTruthFrame {
        map: FixationMap::zeros(64, 32),
        fixations: fixations.clone(),
    };
    let spot = gt_spot(&gt, &ClusterConfig::default()).unwrap().unwrap();
    for f in fixations {
        let (x, y) = fixation_cell(f, 64, 32);
        assert!(spot.contains(x, y));
    }
}

#[test]
fn auc_of_a_map_against_its_own_fixations() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let samples: Vec<GazeSample> = (0..20)
        .map(|k| GazeSample {
            user_id: 0,
            frame_index: 0,
            t_ms: k,
            direction: SphericalCoord::from_degrees(
                rng.random_range(-70.0..70.0),
                rng.random_range(-180.0..180.0),
            )
            .unwrap(),
            valid: true,
        })
        .collect();
    let map = rasterize_fixation_map(&samples, 64, 32, 2.0).unwrap();
    let fix: Vec<(u32, u32)> = samples
        .iter()
        .map(|s| fixation_cell(s.direction, 64, 32))
        .collect();
    assert!(metric_auc_judd(&map, &fix).unwrap() >= 0.99);
}
