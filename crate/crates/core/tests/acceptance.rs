//! One line per acceptance criterion: `PASS` or `FAIL`, the measured numbers
//! and the wall time against the budget. Exits nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use pancake::control::{detect_drip, gradient_check, train_new, ControlError, DatasetSpec, MlpModel, Normalization, TrainConfig};
use pancake::control::{gen_speed_dataset, gen_time_dataset};
use pancake::eval::{
    pour_shape, run_line_experiment, run_perception_experiment, run_round_experiment, train_ratio_model,
    train_speed_model, train_time_model, PerceptionExperimentConfig, LineExperimentConfig, RoundExperimentConfig,
};
use pancake::perception::{
    estimate_level, estimate_ratio, fine_heights, fit_circle, fit_ratio_model, ground_truth_stop_trial, perceive,
    stir_to_uniformity, PerceptionConfig, TrainingBatch, WeightingMode,
};
use pancake::planner::{
    build_graph, concentric_loops, fixture_corpus, mst_refine, skeletonize, PlanMode, FIXTURE_STROKE_PX,
};
use pancake::sim::{
    mean_torque, probe_bowl_contact, probe_contacts, quick_stir_trial, run_preliminary, spout_mask_sequence,
    theta_start, BatterTruth, BowlSpec, SpoutCamera, SurrogateParams, TorqueSensor, PROBE_DIRECTIONS,
};
use pancake::{Point2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn params() -> SurrogateParams {
    SurrogateParams::default()
}

fn level_estimation() -> Check {
    let quiet = params().noise_free();
    let mut worst = 0.0f64;
    for i in 0..20 {
        let level = 0.005 + 0.05 * i as f64 / 19.0;
        let t = BatterTruth::new(1.3, level, BowlSpec::large()).unwrap();
        let curve = TorqueSensor::new(i).sweep(&t, &quiet, &fine_heights()).unwrap();
        let est = estimate_level(&curve, 1e-12).map_err(|e| e.to_string())?;
        worst = worst.max((est.level - level).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut rel = 0.0;
    for i in 0..20 {
        let level = rng.gen_range(0.005..=0.055);
        let t = BatterTruth::new(rng.gen_range(1.0..=1.5), level, BowlSpec::large()).unwrap();
        let out = perceive(&t, &params(), &PerceptionConfig::default(), None, i).map_err(|e| e.to_string())?;
        rel += (out.level.level - level).abs() / level / 20.0;
    }
    ensure(
        worst <= 1e-9 && rel <= 0.05,
        format!("noise-free max error {worst:.1e} m, noisy mean relative error {:.2}%", 100.0 * rel),
    )
}

fn ratio_estimation() -> Check {
    let model = train_ratio_model(&params(), &PerceptionConfig::default(), WeightingMode::InverseMse, 0)
        .map_err(|e| e.to_string())?;
    let report = run_perception_experiment(
        &model,
        &params(),
        &PerceptionConfig::default(),
        &PerceptionExperimentConfig::default(),
        0,
    )
    .map_err(|e| e.to_string())?;
    let errs: Vec<f64> = report.rows.iter().filter(|r| r.method.starts_with("ratio_")).map(|r| r.abs_error).collect();
    let mae = errs.iter().sum::<f64>() / errs.len() as f64;

    let quiet = params().noise_free();
    let t = |r: f64| BatterTruth::new(r, 0.03, BowlSpec::small()).unwrap();
    let batches: Vec<TrainingBatch> = (0..=10)
        .map(|k| {
            let ratio = 1.0 + 0.05 * k as f64;
            let curve = TorqueSensor::new(0).sweep(&t(ratio), &quiet, &fine_heights()).unwrap();
            TrainingBatch { ratio, curve, level: 0.03 }
        })
        .collect();
    let exact_model = fit_ratio_model(&batches).map_err(|e| e.to_string())?;
    let exact = batches
        .iter()
        .all(|b| estimate_ratio(&b.curve, b.level, &exact_model).ok() == Some(b.ratio));
    ensure(
        errs.len() == 15 && mae <= 0.05 && exact,
        format!("MAE {mae:.4} over {} batters, exact label on training curves: {exact}", errs.len()),
    )
}

fn uniformity_stopping() -> Check {
    let cfg = PerceptionConfig::default().uniformity;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0i64;
    for i in 0..15 {
        let bowl = if i % 3 == 0 { BowlSpec::large() } else { BowlSpec::small() };
        let t = BatterTruth::new(rng.gen_range(1.0..=1.5), rng.gen_range(0.01..=0.045), bowl).unwrap();
        let mixed = run_preliminary(&t);
        let got = stir_to_uniformity(&mixed, &params(), &cfg, &mut TorqueSensor::new(i))
            .map_err(|e| e.to_string())?
            .stop_trial;
        let want = ground_truth_stop_trial(&mixed, &params(), &cfg).map_err(|e| e.to_string())?;
        worst = worst.max((got as i64 - want as i64).abs());
    }
    let mut t = run_preliminary(&BatterTruth::new(1.3, 0.03, BowlSpec::small()).unwrap());
    let mut torques = Vec::new();
    for _ in 0..50 {
        t = quick_stir_trial(&t);
        torques.push(mean_torque(&t, &params(), 0.002));
    }
    let decreasing = torques.windows(2).all(|w| w[1] < w[0]);
    ensure(
        worst <= 1 && decreasing,
        format!("max stop-trial offset {worst}, noise-free trial torques strictly decreasing: {decreasing}"),
    )
}

fn mlp_correctness() -> Check {
    let p = params();
    let speed = gen_speed_dataset(&DatasetSpec::speed_default(), &p).map_err(|e| e.to_string())?;
    let time = gen_time_dataset(&DatasetSpec::time_default(), &p).map_err(|e| e.to_string())?;
    let cfg = TrainConfig::for_control();

    let (xs, ys) = (speed.features(), speed.targets());
    let norms = Normalization::fit(&xs, &ys, &cfg.log_features, cfg.log_target).map_err(|e| e.to_string())?;
    let xn: Vec<Vec<f64>> = xs.iter().map(|x| norms.input(x)).collect();
    let yn: Vec<f64> = ys.iter().map(|&y| norms.target(y)).collect();
    let model = MlpModel::new(&cfg.layer_sizes(2), 11).map_err(|e| e.to_string())?;
    let errs = gradient_check(&model, &xn, &yn, 120, 5);
    let worst_grad = errs.iter().copied().fold(0.0, f64::max);

    let mut ratios = Vec::new();
    for data in [&speed, &time] {
        let (_, history) = train_new(&data.features(), &data.targets(), &cfg).map_err(|e| e.to_string())?;
        ratios.push(history.last().unwrap() / history[0]);
    }
    ensure(
        errs.len() >= 100 && worst_grad <= 1e-4 && ratios.iter().all(|&r| r <= 0.1),
        format!(
            "{} probes, max relative gradient error {worst_grad:.1e}; final/initial MSE speed {:.1e}, time {:.1e}",
            errs.len(),
            ratios[0],
            ratios[1]
        ),
    )
}

fn line_strokes() -> Check {
    let model = train_speed_model(&params(), 0).map_err(|e| e.to_string())?;
    let report = run_line_experiment(&model, &params(), &LineExperimentConfig::default(), 0).map_err(|e| e.to_string())?;
    let ours = report.summary("ours").unwrap();
    let simple = report.summary("simple").unwrap();
    ensure(
        ours.n == 20 && ours.mean_pct_error <= 0.10 && ours.pct_variance <= 0.12 && simple.mean_pct_error > ours.mean_pct_error,
        format!(
            "ours {:.2}% error, {:.2}% variance; simple {:.2}% error",
            100.0 * ours.mean_pct_error,
            100.0 * ours.pct_variance,
            100.0 * simple.mean_pct_error
        ),
    )
}

fn round_shapes() -> Check {
    let model = train_time_model(&params(), 0).map_err(|e| e.to_string())?;
    let report = run_round_experiment(&model, &params(), &RoundExperimentConfig::default(), 0).map_err(|e| e.to_string())?;
    let ours = report.summary("ours").unwrap();
    let base = report.summary("baseline").unwrap();
    ensure(
        ours.mean_pct_error <= 0.05 && base.mean_pct_error > 3.0 * ours.mean_pct_error,
        format!("ours {:.2}% area error, baseline {:.2}%", 100.0 * ours.mean_pct_error, 100.0 * base.mean_pct_error),
    )
}

fn planner_geometry() -> Check {
    let corpus = fixture_corpus();
    let disk = &corpus.iter().find(|(n, _)| *n == "disk").unwrap().1;
    let loops = concentric_loops(disk, FIXTURE_STROKE_PX).map_err(|e| e.to_string())?;
    let mut radius_off = 0.0f64;
    for (l, want) in loops.iter().zip([35.0, 25.0, 15.0, 5.0]) {
        let mean = l.points.iter().map(|&(x, y)| (x as f64 - 50.0).hypot(y as f64 - 50.0)).sum::<f64>()
            / l.points.len() as f64;
        radius_off = radius_off.max((mean - want).abs());
    }

    let mut idempotent = true;
    let mut trees = true;
    for (_, m) in &corpus {
        let s = skeletonize(m);
        idempotent &= skeletonize(&s) == s;
        let tree = mst_refine(&build_graph(&s).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        trees &= tree.is_forest() && tree.edges.len() + tree.components().1 == tree.nodes.len();
    }

    let speed = train_speed_model(&params(), 0).map_err(|e| e.to_string())?;
    let truth = BatterTruth::new(1.3, 0.03, BowlSpec::small()).unwrap();
    let mut ious = Vec::new();
    for (i, (name, m)) in corpus.iter().enumerate() {
        let w = FIXTURE_STROKE_PX * m.scale;
        let out = pour_shape(m, w, PlanMode::Auto, &truth, &params(), Some(&speed), i as u64).map_err(|e| e.to_string())?;
        ious.push((*name, out.iou.unwrap()));
    }
    let min_iou = ious.iter().map(|x| x.1).fold(1.0, f64::min);
    let listed: Vec<String> = ious.iter().map(|(n, v)| format!("{n} {v:.3}")).collect();
    ensure(
        loops.len() == 4 && radius_off <= 1.0 && idempotent && trees && min_iou >= 0.8,
        format!(
            "{} disk loops, max radius offset {radius_off:.2} px, skeleton idempotent {idempotent}, spanning trees {trees}, IoU {}",
            loops.len(),
            listed.join(", ")
        ),
    )
}

fn circle_fit() -> Check {
    let bowl = BowlSpec::large();
    let start = Point2::new(0.012, -0.007);
    let exact: Vec<Point2> = PROBE_DIRECTIONS
        .iter()
        .map(|&(x, y)| probe_bowl_contact(&bowl, start, Vector2::new(x, y)).unwrap())
        .collect();
    let c = fit_circle(&exact).map_err(|e| e.to_string())?;
    let exact_err = (c.center - bowl.center).norm().max((c.radius - bowl.radius).abs());
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let pts = probe_contacts(&bowl, start, 5e-4, seed).unwrap();
        worst = worst.max((fit_circle(&pts).map_err(|e| e.to_string())?.radius - bowl.radius).abs());
    }
    ensure(
        exact_err <= 1e-9 && worst <= 1e-3,
        format!("exact error {exact_err:.1e} m, worst jittered radius error {:.3} mm", 1e3 * worst),
    )
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join(format!("tests/fixtures/{name}.pgm"))
        .to_string_lossy()
        .into_owned()
}

fn session(dir: &Path) -> Result<Vec<(PathBuf, Vec<u8>)>, String> {
    let star = fixture("star");
    let runs: Vec<Vec<&str>> = vec![
        vec!["gen-data", "--out", "data"],
        vec!["stir", "--ratio", "1.3", "--level", "30mm", "--out", "stir.json"],
        vec!["estimate", "--curve", "data/torque/ratio_1.25.csv", "--model", "data/ratio_model.json", "--out", "est.json"],
        vec!["train", "--task", "speed", "--data", "data/speed.csv", "--out", "speed.json"],
        vec!["train", "--task", "time", "--data", "data/time.csv", "--out", "time.json"],
        vec!["plan", "--image", &star, "--out", "star.json", "--svg", "star.svg"],
        vec!["pour", "--traj", "star.json", "--ratio", "1.3", "--level", "30mm", "--model", "speed.json", "--out", "pour.pgm", "--report", "pour.json"],
        vec!["eval", "--experiment", "perception", "--ratio-model", "data/ratio_model.json", "--out", "eval"],
        vec!["eval", "--experiment", "lines", "--speed-model", "speed.json", "--out", "eval"],
        vec!["eval", "--experiment", "round", "--time-model", "time.json", "--out", "eval"],
    ];
    for args in runs {
        let out = Command::new(env!("CARGO_BIN_EXE_pancake"))
            .current_dir(dir)
            .arg("--seed")
            .arg("3")
            .args(&args)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{} failed: {}", args[0], String::from_utf8_lossy(&out.stderr)));
        }
    }
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        for entry in std::fs::read_dir(&p).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
                files.push((path.strip_prefix(dir).unwrap().to_path_buf(), bytes));
            }
        }
    }
    files.sort();
    Ok(files)
}

fn cli_determinism() -> Check {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fa = session(a.path())?;
    let fb = session(b.path())?;
    let differing: Vec<String> = fa
        .iter()
        .zip(&fb)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.display().to_string())
        .collect();
    ensure(
        fa.len() == fb.len() && differing.is_empty(),
        format!("{} files compared across two runs, {} differ {}", fa.len(), differing.len(), differing.join(" ")).trim_end().to_string(),
    )
}

fn drip_detection() -> Check {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut flow_off, mut spout_off) = (0i64, 0i64);
    for seed in 0..50 {
        let level = rng.gen_range(0.01..=0.045);
        let t = BatterTruth::new(1.3, level, BowlSpec::small()).unwrap();
        let th = theta_start(level, &p);
        let lead = rng.gen_range(0.002..0.012);
        let angles: Vec<f64> = (0..40).map(|k| th - lead + 0.0007 * k as f64).collect();
        let seq = spout_mask_sequence(&angles, &t, &p, &SpoutCamera::default(), seed).unwrap();
        let ev = detect_drip(&seq.masks).map_err(|e| e.to_string())?;
        flow_off = flow_off.max((ev.flow_start as i64 - seq.flow_start.unwrap() as i64).abs());
        let got = ev.spout_end.ok_or("no spout end detected")?;
        spout_off = spout_off.max((got as i64 - seq.spout_end.unwrap() as i64).abs());
    }
    let mut constant_ok = true;
    for seed in 0..10 {
        let t = BatterTruth::new(1.3, 0.03, BowlSpec::small()).unwrap();
        let seq = spout_mask_sequence(&[0.1; 20], &t, &p, &SpoutCamera::default(), seed).unwrap();
        constant_ok &= detect_drip(&seq.masks) == Err(ControlError::NoFlowDetected);
    }
    ensure(
        flow_off <= 1 && spout_off <= 2 && constant_ok,
        format!("max flow-start offset {flow_off}, max spout-end offset {spout_off}, constant sequences rejected: {constant_ok}"),
    )
}

fn main() {
    let criteria: [(&str, Option<f64>, fn() -> Check); 10] = [
        ("level estimation", Some(1.0), level_estimation),
        ("ratio estimation", Some(5.0), ratio_estimation),
        ("uniformity stopping", Some(2.0), uniformity_stopping),
        ("mlp correctness", Some(30.0), mlp_correctness),
        ("line strokes", Some(30.0), line_strokes),
        ("round shapes", Some(30.0), round_shapes),
        ("planner geometry", Some(20.0), planner_geometry),
        ("circle fit", None, circle_fit),
        ("cli determinism", None, cli_determinism),
        ("drip detection", None, drip_detection),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let result = check();
        let secs = t0.elapsed().as_secs_f64();
        let in_time = budget.map_or(true, |b| secs < b);
        let limit = budget.map_or(String::new(), |b| format!(" / {b} s"));
        let (ok, detail) = match result {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{secs:.2} s{limit}]",
            if ok { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
