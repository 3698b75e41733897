//! Push sweep through air and batter, then the two-line level estimate.

use pancake::perception::{coarse_heights, default_jump_threshold, estimate_level};
use pancake::sim::{BatterTruth, BowlSpec, SurrogateParams, TorqueSensor};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = SurrogateParams::default();
    let truth = BatterTruth::new(1.25, 0.0235, BowlSpec::large())?;
    let mut sensor = TorqueSensor::new(3);
    let curve = sensor.sweep(&truth, &params, &coarse_heights())?;
    for (h, t) in curve.heights().iter().zip(curve.torques()) {
        println!("{:5.1} mm  {:+.3e}", h * 1e3, t);
    }
    let est = estimate_level(&curve, default_jump_threshold(&params))?;
    println!(
        "level {:.2} mm (true {:.2} mm), batter slope {:.4} N*m/m",
        est.level * 1e3,
        truth.level * 1e3,
        est.batter_line.slope
    );

    // the noise-free curve pins the level down to rounding
    let exact = TorqueSensor::new(0).sweep(&truth, &params.noise_free(), &coarse_heights())?;
    let e = estimate_level(&exact, 1e-12)?;
    println!("noise-free error {:.1e} m", (e.level - truth.level).abs());
    Ok(())
}
