use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{parse_length, RunConfig};
use super::{BowlArg, Cli, CliError, Command, ExperimentArg, ModeArg, TaskArg};
use crate::control::{gen_speed_dataset, gen_time_dataset, train_new, Dataset, DatasetSpec, MlpModel, Task, TrainConfig};
use crate::eval::{
    pour_shape, pour_trajectory, run_line_experiment, run_perception_experiment, run_round_experiment,
    train_ratio_model, train_speed_model, train_time_model, ExperimentReport, LineExperimentConfig,
    PerceptionExperimentConfig, RoundExperimentConfig, ShapePour,
};
use crate::geom::Point2;
use crate::perception::{
    estimate_level, estimate_ratio, fit_ratio_model, ground_truth_stop_trial, perceive, stir_to_uniformity,
    RatioModel, TorqueCurve, TrainingBatch,
};
use crate::planner::{load_pgm, plan, write_gray_pgm, PlanMode, Trajectory};
use crate::sim::{
    run_preliminary, spread_thickness, BatterTruth, BowlSpec, DepositionGrid, SurrogateParams, TorqueSensor,
    DEFAULT_GRID_RESOLUTION,
};

type Result<T> = std::result::Result<T, CliError>;

/// `println!` that ignores a closed stdout.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

struct Ctx {
    cfg: RunConfig,
    seed: u64,
}

impl Ctx {
    fn params(&self) -> &SurrogateParams {
        &self.cfg.surrogate
    }

    fn length(&self, text: &str, what: &str) -> Result<f64> {
        let v = parse_length(text, self.cfg.units).map_err(|e| CliError::Invalid(format!("--{what}: {e}")))?;
        if !(v > 0.0) {
            return Err(CliError::Invalid(format!("--{what} must be positive")));
        }
        Ok(v)
    }

    fn show(&self, metres: f64) -> String {
        self.cfg.units.show(metres)
    }
}

pub(super) fn dispatch(cli: &Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text).map_err(CliError::Invalid)?
        }
        None => RunConfig::default(),
    };
    let seed = cli.seed.unwrap_or(cfg.seed);
    let ctx = Ctx { cfg, seed };
    match &cli.command {
        Command::GenData { ratios, pushes, out } => gen_data(&ctx, ratios, *pushes, out.as_deref()),
        Command::Stir { batter, out } => stir(&ctx, &batter_truth(&ctx, batter.ratio, &batter.level, batter.bowl)?, out.as_deref()),
        Command::Estimate {
            curve,
            live: _,
            ratio,
            level,
            bowl,
            model,
            out,
        } => {
            let truth = match (curve, ratio, level) {
                (None, Some(r), Some(l)) => Some(batter_truth(&ctx, *r, l, *bowl)?),
                _ => None,
            };
            estimate(&ctx, curve.as_deref(), truth.as_ref(), model.as_deref(), out.as_deref())
        }
        Command::Train {
            task,
            data,
            out,
            loss_out,
            epochs,
            lr,
            hidden,
        } => train(&ctx, *task, data, out.as_deref(), loss_out.as_deref(), *epochs, *lr, hidden.as_deref()),
        Command::Plan {
            image,
            stroke_width,
            mode,
            pixel_size,
            out,
            svg,
        } => plan_cmd(&ctx, image, stroke_width, *mode, pixel_size, out, svg.as_deref()),
        Command::Pour {
            traj,
            image,
            batter,
            stroke_width,
            mode,
            pixel_size,
            model,
            out,
            report,
        } => {
            let truth = batter_truth(&ctx, batter.ratio, &batter.level, batter.bowl)?;
            let source = match (traj, image) {
                (Some(t), _) => PourSource::Trajectory(t),
                (None, Some(i)) => PourSource::Image { path: i, stroke_width, mode: *mode, pixel_size },
                (None, None) => return Err(CliError::Invalid("one of --traj or --image is required".into())),
            };
            pour(&ctx, source, &truth, model.as_deref(), out, report.as_deref())
        }
        Command::Eval {
            experiment,
            out,
            speed_model,
            time_model,
            ratio_model,
        } => eval(&ctx, *experiment, out.as_deref(), speed_model.as_deref(), time_model.as_deref(), ratio_model.as_deref()),
    }
}

fn bowl(b: BowlArg) -> BowlSpec {
    match b {
        BowlArg::Small => BowlSpec::small(),
        BowlArg::Large => BowlSpec::large(),
    }
}

fn batter_truth(ctx: &Ctx, ratio: f64, level: &str, b: BowlArg) -> Result<BatterTruth> {
    let level = ctx.length(level, "level")?;
    Ok(BatterTruth::new(ratio, level, bowl(b))?)
}

fn plan_mode(m: ModeArg) -> PlanMode {
    match m {
        ModeArg::Auto => PlanMode::Auto,
        ModeArg::Enclosed => PlanMode::Enclosed,
        ModeArg::Open => PlanMode::Open,
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::result::Result<(), String>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(CliError::Runtime)?;
    Ok(buf)
}

/// `lo:hi:step` or `a,b,c`.
fn parse_ratios(text: &str) -> Result<Vec<f64>> {
    let bad = || CliError::Invalid(format!("--ratios: cannot parse `{text}` (lo:hi:step or a,b,c)"));
    let nums = |s: &str, sep: char| -> Result<Vec<f64>> {
        s.split(sep).map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect()
    };
    let ratios = if text.contains(':') {
        let v = nums(text, ':')?;
        let [lo, hi, step] = v[..] else { return Err(bad()) };
        if !(step > 0.0) || hi < lo {
            return Err(bad());
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        (0..=n).map(|k| ((lo + k as f64 * step) * 1e6).round() / 1e6).collect()
    } else {
        nums(text, ',')?
    };
    let (lo, hi) = BatterTruth::RATIO_RANGE;
    if ratios.is_empty() || ratios.iter().any(|r| !(lo..=hi).contains(r)) {
        return Err(CliError::Invalid(format!("--ratios must lie in [{lo}, {hi}]")));
    }
    Ok(ratios)
}

fn gen_data(ctx: &Ctx, ratios: &str, pushes: usize, out: Option<&Path>) -> Result<()> {
    let ratios = parse_ratios(ratios)?;
    if !(4..=63).contains(&pushes) {
        return Err(CliError::Invalid("--pushes must be between 4 and 63".into()));
    }
    let out = out.map_or_else(|| ctx.cfg.paths.dataset_dir.clone(), Path::to_path_buf);
    let params = ctx.params();
    let pcfg = ctx.cfg.perception();
    let heights: Vec<f64> = (1..=pushes).map(|i| i as f64 * 1e-3).collect();
    let mut batches = Vec::new();
    let mut all = csv::Writer::from_writer(Vec::new());
    all.write_record(["ratio", "tip_height_m", "torque_nm"]).map_err(|e| CliError::Runtime(e.to_string()))?;
    for (k, &ratio) in ratios.iter().enumerate() {
        let truth = BatterTruth::from_water(ratio, pcfg.training_water_mass, BowlSpec::small())?;
        let mut sensor = TorqueSensor::new(crate::eval::derive_seed(ctx.seed, k as u64));
        let stirred = stir_to_uniformity(&run_preliminary(&truth), params, &pcfg.uniformity, &mut sensor)?;
        let curve = sensor.sweep(&stirred.truth, params, &heights)?;
        let level = estimate_level(&curve, pcfg.jump_threshold_for(params))?;
        let bytes = csv_bytes(|b| curve.write_csv(b).map_err(|e| e.to_string()))?;
        write_file(&out.join("torque").join(format!("ratio_{ratio:.2}.csv")), &bytes)?;
        for (h, t) in curve.heights().iter().zip(curve.torques()) {
            all.write_record([ratio.to_string(), h.to_string(), t.to_string()])
                .map_err(|e| CliError::Runtime(e.to_string()))?;
        }
        batches.push(TrainingBatch {
            ratio,
            curve,
            level: level.level,
        });
    }
    let all = all.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
    write_file(&out.join("torque.csv"), &all)?;
    let model = fit_ratio_model(&batches)?.with_mode(ctx.cfg.weighting_mode);
    write_file(&out.join("ratio_model.json"), model.to_json().as_bytes())?;

    let speed = gen_speed_dataset(&DatasetSpec::speed_default(), params)?;
    let time = gen_time_dataset(&DatasetSpec::time_default(), params)?;
    for (name, d) in [("speed.csv", &speed), ("time.csv", &time)] {
        let bytes = csv_bytes(|b| d.write_csv(b).map_err(|e| e.to_string()))?;
        write_file(&out.join(name), &bytes)?;
    }
    say!(
        "{} torque samples over {} ratios, {} speed rows, {} time rows -> {}",
        ratios.len() * pushes,
        ratios.len(),
        speed.rows.len(),
        time.rows.len(),
        out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct StirReport {
    stop_trial: usize,
    ground_truth_trial: usize,
    threshold_nm: f64,
    trial_torques_nm: Vec<f64>,
}

fn stir(ctx: &Ctx, truth: &BatterTruth, out: Option<&Path>) -> Result<()> {
    let params = ctx.params();
    let pcfg = ctx.cfg.perception();
    let mixed = run_preliminary(truth);
    let mut sensor = TorqueSensor::new(ctx.seed);
    let outcome = stir_to_uniformity(&mixed, params, &pcfg.uniformity, &mut sensor)?;
    let gt = ground_truth_stop_trial(&mixed, params, &pcfg.uniformity)?;
    say!("uniform after trial {} (noise-free stop: {gt})", outcome.stop_trial);
    for (k, t) in outcome.monitor.trial_torques().iter().enumerate() {
        say!("trial {:>2}  {t:.6e} N*m", k + 1);
    }
    if let Some(path) = out {
        write_json(
            path,
            &StirReport {
                stop_trial: outcome.stop_trial,
                ground_truth_trial: gt,
                threshold_nm: outcome.monitor.threshold(),
                trial_torques_nm: outcome.monitor.trial_torques().to_vec(),
            },
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct EstimateReport {
    level_m: f64,
    ratio: f64,
    split_index: usize,
}

fn load_or_train_ratio_model(ctx: &Ctx, path: Option<&Path>) -> Result<RatioModel> {
    match path {
        Some(p) => Ok(RatioModel::from_json(&read_text(p)?)?),
        None => {
            log::info!("no ratio model given, training one");
            Ok(train_ratio_model(ctx.params(), &ctx.cfg.perception(), ctx.cfg.weighting_mode, ctx.seed)?)
        }
    }
}

fn estimate(
    ctx: &Ctx,
    curve: Option<&Path>,
    live: Option<&BatterTruth>,
    model: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let model = load_or_train_ratio_model(ctx, model)?;
    let params = ctx.params();
    let pcfg = ctx.cfg.perception();
    let (level, ratio) = match (curve, live) {
        (Some(path), _) => {
            let file = fs::File::open(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
            let curve = TorqueCurve::read_csv(file)?;
            let level = estimate_level(&curve, pcfg.jump_threshold_for(params))?;
            let ratio = estimate_ratio(&curve, level.level, &model)?;
            (level, ratio)
        }
        (None, Some(truth)) => {
            let o = perceive(truth, params, &pcfg, Some(&model), ctx.seed)?;
            (o.level, o.ratio.expect("model supplied"))
        }
        (None, None) => return Err(CliError::Invalid("need --curve or --live".into())),
    };
    say!("level {}", ctx.show(level.level));
    say!("ratio {ratio:.4}");
    if let Some(path) = out {
        write_json(
            path,
            &EstimateReport {
                level_m: level.level,
                ratio,
                split_index: level.split_index,
            },
        )?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn train(
    ctx: &Ctx,
    task: TaskArg,
    data: &Path,
    out: Option<&Path>,
    loss_out: Option<&Path>,
    epochs: Option<usize>,
    lr: Option<f64>,
    hidden: Option<&str>,
) -> Result<()> {
    let file = fs::File::open(data).map_err(|e| CliError::Invalid(format!("{}: {e}", data.display())))?;
    let dataset = Dataset::read_csv(file)?;
    let want = match task {
        TaskArg::Speed => Task::Speed,
        TaskArg::Time => Task::Time,
    };
    if dataset.task != want {
        return Err(CliError::Invalid(format!("{} holds a {:?} dataset", data.display(), dataset.task)));
    }
    let mut cfg = TrainConfig {
        seed: ctx.seed,
        ..TrainConfig::for_control()
    };
    if let Some(e) = epochs {
        cfg.epochs = e;
    }
    if let Some(l) = lr {
        cfg.learning_rate = l;
    }
    if let Some(h) = hidden {
        cfg.hidden = h
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| CliError::Invalid(format!("--hidden: cannot parse `{h}`")))?;
    }
    let (model, history) = train_new(&dataset.features(), &dataset.targets(), &cfg)?;
    let default_out = ctx.cfg.paths.model_dir.join(match task {
        TaskArg::Speed => "speed.json",
        TaskArg::Time => "time.json",
    });
    let out = out.unwrap_or(&default_out);
    write_file(out, model.to_json().as_bytes())?;
    let loss_path = loss_out.map_or_else(|| out.with_extension("loss.csv"), Path::to_path_buf);
    let mut csv = String::from("epoch,loss\n");
    for (i, l) in history.iter().enumerate() {
        csv.push_str(&format!("{i},{l}\n"));
    }
    write_file(&loss_path, csv.as_bytes())?;
    say!(
        "{} rows, loss {:.3e} -> {:.3e} after {} epochs",
        dataset.rows.len(),
        history.first().copied().unwrap_or(f64::NAN),
        history.last().copied().unwrap_or(f64::NAN),
        history.len()
    );
    Ok(())
}

fn load_mask(ctx: &Ctx, image: &Path, pixel_size: &str) -> Result<crate::planner::BinaryMask> {
    let mut mask = load_pgm(image)?;
    mask.scale = ctx.length(pixel_size, "pixel-size")?;
    Ok(mask)
}

fn plan_cmd(
    ctx: &Ctx,
    image: &Path,
    stroke_width: &str,
    mode: ModeArg,
    pixel_size: &str,
    out: &Path,
    svg: Option<&Path>,
) -> Result<()> {
    let mask = load_mask(ctx, image, pixel_size)?;
    let w = ctx.length(stroke_width, "stroke-width")?;
    let traj = plan(&mask, w, plan_mode(mode), Point2::origin())?;
    let mut json = traj.to_json();
    json.push('\n');
    write_file(out, json.as_bytes())?;
    if let Some(p) = svg {
        write_file(p, traj.to_svg().as_bytes())?;
    }
    let closed = traj.strokes.iter().filter(|s| s.closed).count();
    say!(
        "{} strokes ({closed} closed), path length {}",
        traj.strokes.len(),
        ctx.show(traj.total_length())
    );
    Ok(())
}

enum PourSource<'a> {
    Trajectory(&'a Path),
    Image {
        path: &'a Path,
        stroke_width: &'a str,
        mode: ModeArg,
        pixel_size: &'a str,
    },
}

#[derive(Serialize)]
struct PourReport {
    strokes: usize,
    speed_m_s: Vec<f64>,
    initial_angle_rad: f64,
    start_angle_rad: f64,
    pour_time_s: f64,
    travel_time_s: f64,
    poured_volume_m3: f64,
    deposited_volume_m3: f64,
    ran_dry: bool,
    iou: Option<f64>,
}

fn pour(
    ctx: &Ctx,
    source: PourSource<'_>,
    truth: &BatterTruth,
    model: Option<&Path>,
    out: &Path,
    report: Option<&Path>,
) -> Result<()> {
    let params = ctx.params();
    let model = model.map(|p| MlpModel::from_json(&read_text(p)?).map_err(CliError::from)).transpose()?;
    let result: ShapePour = match source {
        PourSource::Image {
            path,
            stroke_width,
            mode,
            pixel_size,
        } => {
            let mask = load_mask(ctx, path, pixel_size)?;
            let w = ctx.length(stroke_width, "stroke-width")?;
            pour_shape(&mask, w, plan_mode(mode), truth, params, model.as_ref(), ctx.seed)?
        }
        PourSource::Trajectory(path) => {
            let traj = Trajectory::from_json(&read_text(path)?).map_err(CliError::Invalid)?;
            let margin = traj.stroke_width + 0.005;
            let pts = traj.strokes.iter().flat_map(|s| s.points.iter());
            let (mut lo, mut hi) = (Point2::new(f64::MAX, f64::MAX), Point2::new(f64::MIN, f64::MIN));
            for p in pts {
                lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
                hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
            }
            if traj.strokes.is_empty() {
                return Err(CliError::Invalid("trajectory has no strokes".into()));
            }
            let grid = DepositionGrid::covering(
                Point2::new(lo.x - margin, lo.y - margin),
                Point2::new(hi.x + margin, hi.y + margin),
                DEFAULT_GRID_RESOLUTION,
            )?;
            pour_trajectory(traj, grid, None, truth, params, model.as_ref(), ctx.seed)?
        }
    };
    let g = &result.grid;
    let full_scale = 2.0 * spread_thickness(truth.ratio, params);
    write_gray_pgm(g.width(), g.height(), &g.to_gray(full_scale), out)?;
    let o = &result.outcome;
    say!(
        "{} strokes, pour starts at {:.4} rad, {:.1} s pouring + {:.1} s travel, {:.1} ml poured{}",
        result.plan.strokes.len(),
        result.start.start_angle,
        o.pour_time,
        o.travel_time,
        o.poured_volume * 1e6,
        if o.ran_dry { " (bowl ran dry)" } else { "" }
    );
    if let Some(iou) = result.iou {
        say!("IoU vs drawing {iou:.3}");
    }
    if let Some(path) = report {
        write_json(
            path,
            &PourReport {
                strokes: result.plan.strokes.len(),
                speed_m_s: result.plan.strokes.iter().map(|s| s.speed).collect(),
                initial_angle_rad: result.start.initial_angle,
                start_angle_rad: result.start.start_angle,
                pour_time_s: o.pour_time,
                travel_time_s: o.travel_time,
                poured_volume_m3: o.poured_volume,
                deposited_volume_m3: o.deposited_volume,
                ran_dry: o.ran_dry,
                iou: result.iou,
            },
        )?;
    }
    Ok(())
}

fn load_or_train(
    path: Option<&Path>,
    train: impl FnOnce() -> crate::eval::Result<MlpModel>,
) -> Result<MlpModel> {
    match path {
        Some(p) => Ok(MlpModel::from_json(&read_text(p)?)?),
        None => {
            log::info!("no model given, training one on the default dataset");
            Ok(train()?)
        }
    }
}

fn eval(
    ctx: &Ctx,
    experiment: ExperimentArg,
    out: Option<&Path>,
    speed_model: Option<&Path>,
    time_model: Option<&Path>,
    ratio_model: Option<&Path>,
) -> Result<()> {
    let params = ctx.params();
    let report: ExperimentReport = match experiment {
        ExperimentArg::Lines => {
            let m = load_or_train(speed_model, || train_speed_model(params, ctx.seed))?;
            run_line_experiment(&m, params, &LineExperimentConfig::default(), ctx.seed)?
        }
        ExperimentArg::Round => {
            let m = load_or_train(time_model, || train_time_model(params, ctx.seed))?;
            run_round_experiment(&m, params, &RoundExperimentConfig::default(), ctx.seed)?
        }
        ExperimentArg::Perception => {
            let m = load_or_train_ratio_model(ctx, ratio_model)?;
            run_perception_experiment(
                &m,
                params,
                &ctx.cfg.perception(),
                &PerceptionExperimentConfig::default(),
                ctx.seed,
            )?
        }
    };
    let dir: PathBuf = out.map_or_else(|| ctx.cfg.paths.output_dir.clone(), Path::to_path_buf);
    let csv = csv_bytes(|b| report.write_csv(b).map_err(|e| e.to_string()))?;
    write_file(&dir.join(format!("{}.csv", report.experiment)), &csv)?;
    let mut json = report.to_json();
    json.push('\n');
    write_file(&dir.join(format!("{}.json", report.experiment)), json.as_bytes())?;
    let _ = write!(std::io::stdout(), "{}", report.summary_table());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::LengthUnit;

    #[test]
    fn ratio_lists() {
        let r = parse_ratios("1.0:1.5:0.05").unwrap();
        assert_eq!(r.len(), 11);
        assert_eq!(r[10], 1.5);
        assert_eq!(parse_ratios("1.2, 1.3").unwrap(), vec![1.2, 1.3]);
        assert!(parse_ratios("1.0:1.5").is_err());
        assert!(parse_ratios("5.0").is_err());
    }

    #[test]
    fn units_default_to_config() {
        let ctx = Ctx {
            cfg: RunConfig {
                units: LengthUnit::Cm,
                ..RunConfig::default()
            },
            seed: 0,
        };
        assert!((ctx.length("3", "level").unwrap() - 0.03).abs() < 1e-15);
        assert!(ctx.length("-3mm", "level").is_err());
    }
}
