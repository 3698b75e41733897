//! Line, round and perception experiments with their baselines.

use pancake::eval::{
    run_line_experiment, run_perception_experiment, run_round_experiment, train_ratio_model, train_speed_model,
    train_time_model, LineExperimentConfig, PerceptionExperimentConfig, RoundExperimentConfig,
};
use pancake::perception::{PerceptionConfig, WeightingMode};
use pancake::sim::SurrogateParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let params = SurrogateParams::default();

    let speed = train_speed_model(&params, seed)?;
    let lines = run_line_experiment(&speed, &params, &LineExperimentConfig::default(), seed)?;
    println!("lines\n{}", lines.summary_table());

    let time = train_time_model(&params, seed)?;
    let round = run_round_experiment(&time, &params, &RoundExperimentConfig::default(), seed)?;
    println!("round\n{}", round.summary_table());

    let pcfg = PerceptionConfig::default();
    let ratio = train_ratio_model(&params, &pcfg, WeightingMode::InverseMse, seed)?;
    let perception = run_perception_experiment(&ratio, &params, &pcfg, &PerceptionExperimentConfig::default(), seed)?;
    println!("perception\n{}", perception.summary_table());
    Ok(())
}
