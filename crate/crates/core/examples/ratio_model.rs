//! Fit one torque line per training ratio, then classify held-out batters.

use pancake::eval::train_ratio_model;
use pancake::perception::{perceive, PerceptionConfig, WeightingMode};
use pancake::sim::{BatterTruth, BowlSpec, SurrogateParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = SurrogateParams::default();
    let cfg = PerceptionConfig::default();
    let model = train_ratio_model(&params, &cfg, WeightingMode::InverseMse, 0)?;
    for e in &model.entries {
        println!("ratio {:.2}: slope {:.4} N*m/m over {} samples", e.ratio, e.slope, e.samples);
    }
    for (i, (ratio, level)) in [(1.12, 0.02), (1.37, 0.035), (1.48, 0.012)].into_iter().enumerate() {
        let truth = BatterTruth::new(ratio, level, BowlSpec::small())?;
        let out = perceive(&truth, &params, &cfg, Some(&model), 100 + i as u64)?;
        println!(
            "true {ratio:.2} @ {:.1} mm -> {:.3} @ {:.1} mm",
            level * 1e3,
            out.ratio.unwrap_or(f64::NAN),
            out.level.level * 1e3
        );
    }
    Ok(())
}
