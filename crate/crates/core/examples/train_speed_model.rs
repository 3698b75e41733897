//! Simulated line dataset, MLP training and a check against the analytic law.

use pancake::control::{analytic_speed, gen_speed_dataset, predict_speed, train_new, DatasetSpec, TrainConfig};
use pancake::sim::SurrogateParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = SurrogateParams::default();
    let data = gen_speed_dataset(&DatasetSpec::speed_default(), &params)?;
    println!("{} rows", data.rows.len());
    let cfg = TrainConfig::for_control();
    let (model, history) = train_new(&data.features(), &data.targets(), &cfg)?;
    println!("loss {:.3e} -> {:.3e}", history[0], history[history.len() - 1]);
    for (ratio, width) in [(1.27, 0.01), (1.35, 0.025), (1.43, 0.04)] {
        let v = predict_speed(&model, ratio, width)?;
        let exact = analytic_speed(ratio, width, &params);
        println!(
            "r {ratio:.2}, w {:.0} mm: {:.2} mm/s (law {:.2} mm/s)",
            width * 1e3,
            v * 1e3,
            exact * 1e3
        );
    }
    Ok(())
}
