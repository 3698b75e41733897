use pancake::control::{detect_drip, gradient_check, MlpModel};
use pancake::geom::point_in_polygon;
use pancake::perception::{
    estimate_level, estimate_ratio, fit_circle, fit_ratio_model, is_uniform, TrainingBatch,
    UniformityMonitor, WeightingMode,
};
use pancake::planner::{build_graph, concentric_loops, mst_refine, skeletonize, BinaryMask};
use pancake::sim::{
    deposit_stroke, mean_torque, probe_bowl_contact, quick_stir_trial, spout_mask_sequence, theta_start,
    BatterTruth, BowlSpec, DepositionGrid, SpoutCamera, SurrogateParams, TorqueSensor,
};
use pancake::{Point2, Vector2};
use proptest::prelude::*;

fn params() -> SurrogateParams {
    SurrogateParams::default()
}

fn truth(ratio: f64, level: f64) -> BatterTruth {
    BatterTruth::new(ratio, level, BowlSpec::large()).unwrap()
}

fn heights() -> Vec<f64> {
    (1..=63).map(|i| i as f64 * 1e-3).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn torque_monotone_in_depth_ratio_and_stirring(
        r in 0.9f64..1.9, level in 0.01f64..0.05, tip in 0.0f64..0.009, u in 0.0f64..500.0
    ) {
        let p = params();
        let t = BatterTruth { stir_progress: u, ..truth(r, level) };
        let base = mean_torque(&t, &p, tip);
        prop_assert!(mean_torque(&t, &p, tip - 0.001) > base);
        let wetter = BatterTruth { ratio: r + 0.05, ..t };
        let stirred = BatterTruth { stir_progress: u + 10.0, ..t };
        prop_assert!(mean_torque(&wetter, &p, tip) < base);
        prop_assert!(mean_torque(&stirred, &p, tip) < base);
    }

    #[test]
    fn trial_torques_decrease_and_stay_positive(r in 0.9f64..1.9, level in 0.01f64..0.05) {
        let p = params();
        let mut t = truth(r, level);
        let mut prev = f64::INFINITY;
        for _ in 0..60 {
            t = quick_stir_trial(&t);
            let tq = mean_torque(&t, &p, 0.002);
            prop_assert!(tq < prev && tq > 0.0);
            prev = tq;
        }
    }

    #[test]
    fn same_seed_same_torques(seed in any::<u64>(), r in 1.0f64..1.5) {
        let p = params();
        let t = truth(r, 0.03);
        let a = TorqueSensor::new(seed).sweep(&t, &p, &heights()).unwrap();
        let b = TorqueSensor::new(seed).sweep(&t, &p, &heights()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn contact_lies_on_rim(sx in -0.05f64..0.05, sy in -0.05f64..0.05, phi in 0.0f64..std::f64::consts::TAU) {
        let bowl = BowlSpec::large();
        let p = probe_bowl_contact(&bowl, Point2::new(sx, sy), Vector2::new(phi.cos(), phi.sin())).unwrap();
        prop_assert!(((p - bowl.center).norm() - bowl.radius).abs() <= 1e-12);
    }

    #[test]
    fn deposited_volume_matches_flow_time(
        speed in 0.01f64..0.06, len in 0.03f64..0.12, angle in 0.0f64..std::f64::consts::PI, r in 1.1f64..1.6
    ) {
        let p = params();
        let t = truth(r, 0.03);
        let mut grid = DepositionGrid::covering(Point2::new(-0.2, -0.2), Point2::new(0.2, 0.2), 1e-3).unwrap();
        let a = Point2::new(-0.5 * len * angle.cos(), -0.5 * len * angle.sin());
        let b = Point2::new(0.5 * len * angle.cos(), 0.5 * len * angle.sin());
        let added = deposit_stroke(&mut grid, &[a, b], false, speed, &t, &p).unwrap();
        let expected = p.flow_rate * len / speed;
        prop_assert!((added / expected - 1.0).abs() <= 0.01, "{} vs {}", added, expected);
        prop_assert!((grid.total_volume() / expected - 1.0).abs() <= 0.01);
    }

    #[test]
    fn level_exact_without_noise(level in 0.005f64..0.055, r in 0.9f64..1.9, u in 0.0f64..300.0) {
        let p = params().noise_free();
        let t = BatterTruth { stir_progress: u, ..truth(r, level) };
        let curve = TorqueSensor::new(0).sweep(&t, &p, &heights()).unwrap();
        let est = estimate_level(&curve, 1e-12).unwrap();
        prop_assert!((est.level - level).abs() <= 1e-9, "{} vs {}", est.level, level);
    }

    #[test]
    fn ratio_estimate_between_selected_labels(level in 0.01f64..0.05, r in 1.0f64..1.5, seed in any::<u64>()) {
        let p = params();
        let hs = heights();
        let batches: Vec<TrainingBatch> = [1.0, 1.1, 1.2, 1.3, 1.4, 1.5]
            .iter()
            .map(|&ratio| {
                let t = truth(ratio, 0.03);
                let curve = TorqueSensor::new(0).sweep(&t, &p.noise_free(), &hs).unwrap();
                TrainingBatch { ratio, curve, level: 0.03 }
            })
            .collect();
        let curve = TorqueSensor::new(seed).sweep(&truth(r, level), &p, &hs).unwrap();
        for mode in [WeightingMode::InverseMse, WeightingMode::PaperLiteral] {
            let model = fit_ratio_model(&batches).unwrap().with_mode(mode);
            let ranked = model.rank(&curve, level).unwrap();
            let (a, b) = (ranked[0].0, ranked[1].0);
            let est = estimate_ratio(&curve, level, &model).unwrap();
            prop_assert!(est >= a.min(b) - 1e-12 && est <= a.max(b) + 1e-12);
        }
    }

    #[test]
    fn uniformity_monotone_in_threshold(
        torques in prop::collection::vec(0.001f64..0.01, 2..30), th in 1e-5f64..1e-3, extra in 0.0f64..1e-3
    ) {
        let first = |theta: f64| {
            (2..=torques.len()).find(|&k| is_uniform(&UniformityMonitor::with_torques(theta, &torques[..k]).unwrap()).unwrap())
        };
        if let Some(k) = first(th) {
            let k2 = first(th + extra);
            prop_assert!(k2.is_some() && k2.unwrap() <= k);
        }
    }

    #[test]
    fn circle_fit_rigid_invariance(
        cx in -1.0f64..1.0, cy in -1.0f64..1.0, rad in 0.05f64..0.2,
        rot in 0.0f64..std::f64::consts::TAU, tx in -2.0f64..2.0, ty in -2.0f64..2.0,
        noise in prop::collection::vec(-5e-4f64..5e-4, 6)
    ) {
        let pts: Vec<Point2> = (0..6)
            .map(|i| {
                let a = i as f64 * 1.1;
                let r = rad + noise[i];
                Point2::new(cx + r * a.cos(), cy + r * a.sin())
            })
            .collect();
        let moved: Vec<Point2> = pts
            .iter()
            .map(|p| Point2::new(rot.cos() * p.x - rot.sin() * p.y + tx, rot.sin() * p.x + rot.cos() * p.y + ty))
            .collect();
        let a = fit_circle(&pts).unwrap();
        let b = fit_circle(&moved).unwrap();
        let c = a.center;
        let expect = Point2::new(rot.cos() * c.x - rot.sin() * c.y + tx, rot.sin() * c.x + rot.cos() * c.y + ty);
        prop_assert!((a.radius - b.radius).abs() <= 1e-9);
        prop_assert!((b.center - expect).norm() <= 1e-9);
    }

    #[test]
    fn drip_detection_shift_invariant(seed in any::<u64>(), dx in -3i64..4, level in 0.01f64..0.04) {
        let p = params();
        let t = BatterTruth::new(1.3, level, BowlSpec::small()).unwrap();
        let th = theta_start(level, &p);
        let angles: Vec<f64> = (0..40).map(|k| th - 0.008 + 0.0007 * k as f64).collect();
        let seq = spout_mask_sequence(&angles, &t, &p, &SpoutCamera::default(), seed).unwrap();
        let shifted: Vec<BinaryMask> = seq.masks.iter().map(|m| m.shifted_x(dx)).collect();
        prop_assert_eq!(detect_drip(&seq.masks).unwrap(), detect_drip(&shifted).unwrap());
    }

    #[test]
    fn backprop_matches_finite_differences(seed in any::<u64>()) {
        let model = MlpModel::new(&[2, 8, 6, 1], seed).unwrap();
        let xs: Vec<Vec<f64>> = (0..12).map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.53).cos()]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x[0] * x[1] + 0.3).collect();
        for e in gradient_check(&model, &xs, &ys, 20, seed) {
            prop_assert!(e <= 1e-4, "rel err {}", e);
        }
    }
}

fn blob(seed: u64) -> BinaryMask {
    // union of a few disks
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let disks: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| (rng.gen_range(35.0..65.0), rng.gen_range(35.0..65.0), rng.gen_range(15.0..30.0)))
        .collect();
    BinaryMask::from_fn(100, 100, 1e-3, |x, y| {
        disks.iter().any(|&(cx, cy, r)| (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= r * r)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn skeleton_subset_and_idempotent(seed in any::<u64>()) {
        let m = blob(seed);
        let s = skeletonize(&m);
        prop_assert!(s.is_subset_of(&m));
        prop_assert_eq!(skeletonize(&s), s.clone());
        prop_assert_eq!(s.component_count(), m.component_count());
    }

    #[test]
    fn spanning_tree_per_component(seed in any::<u64>()) {
        let s = skeletonize(&blob(seed));
        let g = build_graph(&s).unwrap();
        let t = mst_refine(&g).unwrap();
        let (_, comps) = t.components();
        prop_assert!(t.is_forest());
        prop_assert_eq!(t.edges.len(), t.nodes.len() - comps);
        prop_assert_eq!(comps, g.components().1);
        prop_assert_eq!(mst_refine(&g).unwrap(), t);
    }

    #[test]
    fn inner_loops_inside_outer(seed in any::<u64>()) {
        let m = blob(seed);
        let loops = concentric_loops(&m, 8.0).unwrap();
        let poly = |pts: &[(usize, usize)]| pts.iter().map(|&(x, y)| Point2::new(x as f64, y as f64)).collect::<Vec<_>>();
        for outer in loops.iter().filter(|l| !l.is_hole && l.points.len() >= 3) {
            let outer_poly = poly(&outer.points);
            let outer_mask: Vec<(usize, usize)> = outer.points.clone();
            for inner in loops.iter().filter(|l| l.level == outer.level + 1 && !l.is_hole) {
                // an inner loop belongs to the outer loop whose polygon holds its first vertex
                let first = Point2::new(inner.points[0].0 as f64, inner.points[0].1 as f64);
                if !point_in_polygon(&first, &outer_poly) {
                    continue;
                }
                for &(x, y) in &inner.points {
                    prop_assert!(!outer_mask.contains(&(x, y)));
                    prop_assert!(point_in_polygon(&Point2::new(x as f64, y as f64), &outer_poly));
                }
            }
        }
    }
}

#[test]
fn inverse_mse_returns_training_label_exactly() {
    let p = params().noise_free();
    let hs = heights();
    let batches: Vec<TrainingBatch> = [1.0, 1.1, 1.2, 1.3]
        .iter()
        .map(|&ratio| TrainingBatch {
            ratio,
            curve: TorqueSensor::new(0).sweep(&truth(ratio, 0.03), &p, &hs).unwrap(),
            level: 0.03,
        })
        .collect();
    let model = fit_ratio_model(&batches).unwrap();
    for b in &batches {
        assert_eq!(estimate_ratio(&b.curve, b.level, &model).unwrap(), b.ratio);
    }
}
