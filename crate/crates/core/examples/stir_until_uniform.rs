//! Preliminary mixing followed by perceptive stirring.
//!
//! ```text
//! cargo run --example stir_until_uniform
//! ```

use pancake::perception::{ground_truth_stop_trial, stir_to_uniformity, UniformityConfig};
use pancake::sim::{run_preliminary, BatterTruth, BowlSpec, SurrogateParams, TorqueSensor};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = SurrogateParams::default();
    let cfg = UniformityConfig::default();
    let truth = BatterTruth::new(1.3, 0.03, BowlSpec::small())?;
    let mixed = run_preliminary(&truth);
    println!("after the preliminary phase: {:.1} s of effective stirring", mixed.stir_progress);

    let mut sensor = TorqueSensor::new(7);
    let out = stir_to_uniformity(&mixed, &params, &cfg, &mut sensor)?;
    for (k, t) in out.monitor.trial_torques().iter().enumerate() {
        println!("trial {:>2}: {:.4e} N*m", k + 1, t);
    }
    println!(
        "stopped after trial {} (threshold {:.2e}); noise-free answer {}",
        out.stop_trial,
        out.monitor.threshold(),
        ground_truth_stop_trial(&mixed, &params, &cfg)?
    );
    Ok(())
}
