use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{iou, measure_disk, measure_stroke_width, ExperimentReport, ReportRow, Result};
use crate::control::{
    analytic_speed, execute_plan, gen_speed_dataset, gen_time_dataset, plan_execution, predict_pour_time, start_pour,
    train_new, DatasetSpec, MlpModel, PourOutcome, PourPlan, PourStart, TrainConfig,
};
use crate::geom::Point2;
use crate::perception::{
    collect_training_batch, fit_ratio_model, ground_truth_stop_trial, perceive, PerceptionConfig, RatioModel,
    WeightingMode,
};
use crate::planner::{plan, BinaryMask, PlanMode, Stroke, Trajectory};
use crate::sim::{
    deposit_disk, hold_discharge, run_preliminary, spread_thickness, theta_start, BatterTruth, BowlSpec,
    DepositionGrid, SpoutCamera, SurrogateParams, DEPOSIT_DETECTION_THICKNESS,
};

/// Independent seed for cell `cell` of an experiment run with `master`.
pub fn derive_seed(master: u64, cell: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(cell);
    rng.next_u64()
}

/// One uniform draw from each of `n` equal slices of `[lo, hi]`, ascending.
pub fn stratified_ratios(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| lo + (i as f64 + rng.gen::<f64>()) / n as f64 * (hi - lo))
        .collect()
}

/// Labels 1.0, 1.05, ..., 1.5 collected in the small bowl.
pub fn train_ratio_model(
    params: &SurrogateParams,
    config: &PerceptionConfig,
    mode: WeightingMode,
    seed: u64,
) -> Result<RatioModel> {
    let batches = (0..=10)
        .map(|k| {
            let ratio = 1.0 + 0.05 * k as f64;
            collect_training_batch(ratio, params, config, derive_seed(seed, k))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(fit_ratio_model(&batches)?.with_mode(mode))
}

fn control_config(seed: u64) -> TrainConfig {
    TrainConfig {
        seed,
        ..TrainConfig::for_control()
    }
}

/// Speed model trained on the default simulated line dataset.
pub fn train_speed_model(params: &SurrogateParams, seed: u64) -> Result<MlpModel> {
    let data = gen_speed_dataset(&DatasetSpec::speed_default(), params)?;
    Ok(train_new(&data.features(), &data.targets(), &control_config(seed))?.0)
}

/// Pour-time model trained on the default simulated disk dataset.
pub fn train_time_model(params: &SurrogateParams, seed: u64) -> Result<MlpModel> {
    let data = gen_time_dataset(&DatasetSpec::time_default(), params)?;
    Ok(train_new(&data.features(), &data.targets(), &control_config(seed))?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LineExperimentConfig {
    /// Test ratios are drawn stratified from this range.
    pub ratio_range: (f64, f64),
    pub n_ratios: usize,
    /// m
    pub widths: Vec<f64>,
    /// m
    pub line_length: f64,
    /// Batter level in the large bowl, m.
    pub level: f64,
}

impl Default for LineExperimentConfig {
    fn default() -> Self {
        Self {
            ratio_range: (1.25, 1.45),
            n_ratios: 5,
            widths: vec![0.01, 0.02, 0.03, 0.04],
            line_length: 0.15,
            level: 0.04,
        }
    }
}

/// Speed the fixed-rule baseline uses for `width`: the mean 1 cm speed over
/// the ratio range, scaled inversely with width. It never looks at the ratio.
fn simple_speed(width: f64, range: (f64, f64), params: &SurrogateParams) -> f64 {
    let n = 21;
    let v1 = (0..n)
        .map(|i| analytic_speed(range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64, 0.01, params))
        .sum::<f64>()
        / n as f64;
    v1 * 0.01 / width
}

fn draw_line(plan: &PourPlan, truth: &BatterTruth, params: &SurrogateParams, cfg: &LineExperimentConfig) -> Result<f64> {
    let margin = 2.0 * cfg.widths.iter().copied().fold(0.0, f64::max) + 0.01;
    let mut grid = DepositionGrid::covering(
        Point2::new(-margin, -margin),
        Point2::new(cfg.line_length + margin, margin),
        crate::sim::DEFAULT_GRID_RESOLUTION,
    )?;
    execute_plan(plan, truth, params, &mut grid)?;
    let s = &plan.strokes[0];
    Ok(measure_stroke_width(&grid, &Stroke { points: s.points.clone(), closed: false })?.mean)
}

/// Straight lines of each target width at each test ratio, with the speed
/// from `speed_model` ("ours") and from the fixed inverse-width rule ("simple").
pub fn run_line_experiment(
    speed_model: &MlpModel,
    params: &SurrogateParams,
    cfg: &LineExperimentConfig,
    seed: u64,
) -> Result<ExperimentReport> {
    if !speed_model.trained {
        return Err(crate::control::ControlError::Untrained.into());
    }
    let (lo, hi) = cfg.ratio_range;
    let ratios = stratified_ratios(cfg.n_ratios, lo, hi, derive_seed(seed, 0));
    let mut rows = Vec::new();
    for method in ["ours", "simple"] {
        for &ratio in &ratios {
            let truth = BatterTruth::new(ratio, cfg.level, BowlSpec::large())?;
            let start = theta_start(cfg.level, params);
            for &width in &cfg.widths {
                let traj = Trajectory {
                    strokes: vec![Stroke {
                        points: vec![Point2::origin(), Point2::new(cfg.line_length, 0.0)],
                        closed: false,
                    }],
                    stroke_width: width,
                };
                let mut plan = match method {
                    "ours" => plan_execution(&traj, ratio, Some(speed_model), start, &truth.bowl, params)?,
                    _ => plan_execution(&traj, ratio, None, start, &truth.bowl, params)?,
                };
                if method == "simple" {
                    plan.strokes[0].speed = simple_speed(width, cfg.ratio_range, params);
                }
                let measured = draw_line(&plan, &truth, params, cfg)?;
                rows.push(ReportRow::new(method, ratio, width, measured));
            }
        }
    }
    Ok(ExperimentReport::new("lines", seed, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoundExperimentConfig {
    pub ratio_range: (f64, f64),
    pub n_ratios: usize,
    /// m
    pub diameters: Vec<f64>,
    /// Batter level in the large bowl, m.
    pub level: f64,
    /// Ratio the baseline assumes when converting area to volume.
    pub baseline_ratio: f64,
}

impl Default for RoundExperimentConfig {
    fn default() -> Self {
        Self {
            ratio_range: (1.25, 1.45),
            n_ratios: 5,
            diameters: vec![0.05, 0.10, 0.15, 0.20],
            level: 0.04,
            baseline_ratio: 1.35,
        }
    }
}

fn pour_disk(volume: f64, truth: &BatterTruth, params: &SurrogateParams, diameter: f64) -> Result<f64> {
    let volume = volume.min(truth.volume());
    let r = (volume / (std::f64::consts::PI * spread_thickness(truth.ratio, params))).sqrt().max(diameter / 2.0) + 0.01;
    let mut grid = DepositionGrid::covering(Point2::new(-r, -r), Point2::new(r, r), crate::sim::DEFAULT_GRID_RESOLUTION)?;
    deposit_disk(&mut grid, Point2::origin(), volume, truth, params)?;
    Ok(measure_disk(&grid)?.area)
}

/// Volume the hold-angle baseline discharges for a disk of `diameter`: it
/// converts the area to a volume with a fixed thickness, jumps straight to
/// the tilt where that volume sits above the lip, and holds until the flow
/// stops, so the spout film drains too.
fn baseline_volume(diameter: f64, truth: &BatterTruth, params: &SurrogateParams, cfg: &RoundExperimentConfig) -> f64 {
    let area = std::f64::consts::PI * diameter * diameter / 4.0;
    let volume = area * spread_thickness(cfg.baseline_ratio, params);
    let target_level = truth.level - volume / truth.bowl.cross_section_area();
    hold_discharge(truth, params, theta_start(target_level.max(0.0), params))
}

/// Stationary pours targeting each disk diameter: pour time from
/// `time_model` ("ours") against the hold-angle baseline. Errors are on area.
pub fn run_round_experiment(
    time_model: &MlpModel,
    params: &SurrogateParams,
    cfg: &RoundExperimentConfig,
    seed: u64,
) -> Result<ExperimentReport> {
    if !time_model.trained {
        return Err(crate::control::ControlError::Untrained.into());
    }
    let (lo, hi) = cfg.ratio_range;
    let ratios = stratified_ratios(cfg.n_ratios, lo, hi, derive_seed(seed, 0));
    let mut rows = Vec::new();
    for method in ["ours", "baseline"] {
        for &ratio in &ratios {
            let truth = BatterTruth::new(ratio, cfg.level, BowlSpec::large())?;
            for &d in &cfg.diameters {
                let volume = match method {
                    "ours" => params.flow_rate * predict_pour_time(time_model, ratio, d)?,
                    _ => baseline_volume(d, &truth, params, cfg),
                };
                let target = std::f64::consts::PI * d * d / 4.0;
                rows.push(ReportRow::new(method, ratio, target, pour_disk(volume, &truth, params, d)?));
            }
        }
    }
    Ok(ExperimentReport::new("round", seed, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerceptionExperimentConfig {
    pub n_small: usize,
    pub n_large: usize,
    pub ratio_range: (f64, f64),
    /// Levels are drawn from this range, capped at 90% of the bowl height, m.
    pub level_range: (f64, f64),
}

impl Default for PerceptionExperimentConfig {
    fn default() -> Self {
        Self {
            n_small: 10,
            n_large: 5,
            ratio_range: (1.0, 1.5),
            level_range: (0.005, 0.055),
        }
    }
}

/// Random batters in both bowls run through stirring and perception. Rows
/// per batter: `level_<bowl>`, `ratio_<bowl>` and `stop_trial_<bowl>`, the
/// last against the noise-free stopping trial.
pub fn run_perception_experiment(
    model: &RatioModel,
    params: &SurrogateParams,
    perception: &PerceptionConfig,
    cfg: &PerceptionExperimentConfig,
    seed: u64,
) -> Result<ExperimentReport> {
    let bowls = std::iter::repeat(("small", BowlSpec::small()))
        .take(cfg.n_small)
        .chain(std::iter::repeat(("large", BowlSpec::large())).take(cfg.n_large));
    let mut level_rows = Vec::new();
    let mut ratio_rows = Vec::new();
    let mut stop_rows = Vec::new();
    for (i, (name, bowl)) in bowls.enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2 * i as u64));
        let ratio = rng.gen_range(cfg.ratio_range.0..=cfg.ratio_range.1);
        let top = cfg.level_range.1.min(0.9 * bowl.interior_height);
        let level = rng.gen_range(cfg.level_range.0..=top);
        let truth = BatterTruth::new(ratio, level, bowl)?;
        let out = perceive(&truth, params, perception, Some(model), derive_seed(seed, 2 * i as u64 + 1))?;
        let gt = ground_truth_stop_trial(&run_preliminary(&truth), params, &perception.uniformity)?;
        level_rows.push(ReportRow::new(&format!("level_{name}"), ratio, level, out.level.level));
        let est = out.ratio.expect("model was supplied");
        ratio_rows.push(ReportRow::new(&format!("ratio_{name}"), ratio, ratio, est));
        stop_rows.push(ReportRow::new(&format!("stop_trial_{name}"), ratio, gt as f64, out.stir.stop_trial as f64));
    }
    let rows = level_rows.into_iter().chain(ratio_rows).chain(stop_rows).collect();
    Ok(ExperimentReport::new("perception", seed, rows))
}

/// Result of pouring a planned drawing.
#[derive(Debug, Clone)]
pub struct ShapePour {
    pub trajectory: Trajectory,
    pub plan: PourPlan,
    pub start: PourStart,
    pub outcome: PourOutcome,
    pub grid: DepositionGrid,
    /// Overlap between the covered cells and the reference mask, if any.
    pub iou: Option<f64>,
}

/// Plans `mask`, then pours it onto a griddle with one cell per mask pixel
/// and scores the covered cells against the mask.
pub fn pour_shape(
    mask: &BinaryMask,
    stroke_width: f64,
    mode: PlanMode,
    truth: &BatterTruth,
    params: &SurrogateParams,
    speed_model: Option<&MlpModel>,
    seed: u64,
) -> Result<ShapePour> {
    let trajectory = plan(mask, stroke_width, mode, Point2::origin())?;
    let grid = DepositionGrid::new(Point2::origin(), mask.width(), mask.height(), mask.scale)?;
    pour_trajectory(trajectory, grid, Some(mask), truth, params, speed_model, seed)
}

/// Finds the pouring threshold with the spout camera, times the trajectory
/// and pours it onto `grid`. With a `reference` mask of the grid's size the
/// result carries the IoU of the covered cells.
pub fn pour_trajectory(
    trajectory: Trajectory,
    mut grid: DepositionGrid,
    reference: Option<&BinaryMask>,
    truth: &BatterTruth,
    params: &SurrogateParams,
    speed_model: Option<&MlpModel>,
    seed: u64,
) -> Result<ShapePour> {
    let start = start_pour(truth.level, truth, params, &SpoutCamera::default(), seed)?;
    let plan = plan_execution(&trajectory, truth.ratio, speed_model, start.start_angle, &truth.bowl, params)?;
    let outcome = execute_plan(&plan, truth, params, &mut grid)?;
    let iou = reference
        .map(|m| iou(&grid.covered_mask(DEPOSIT_DETECTION_THICKNESS), m))
        .transpose()?;
    Ok(ShapePour {
        trajectory,
        plan,
        start,
        outcome,
        grid,
        iou,
    })
}
