//! Plan, find the pour threshold, pour and score one fixture.
//!
//! ```text
//! cargo run --example pour_drawing -- crates/core/tests/fixtures/letter.pgm deposit.pgm
//! ```

use pancake::eval::pour_shape;
use pancake::planner::{load_pgm, write_gray_pgm, PlanMode};
use pancake::sim::{spread_thickness, BatterTruth, BowlSpec, SurrogateParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let image = args.next().unwrap_or_else(|| "crates/core/tests/fixtures/letter.pgm".into());
    let params = SurrogateParams::default();
    let truth = BatterTruth::new(1.3, 0.03, BowlSpec::small())?;
    let mask = load_pgm(&image)?;
    let pour = pour_shape(&mask, 0.01, PlanMode::Auto, &truth, &params, None, 0)?;
    let o = &pour.outcome;
    println!(
        "{} strokes at {:.1} mm/s, {:.1} ml in {:.1} s, IoU {:.3}",
        pour.plan.strokes.len(),
        pour.plan.strokes[0].speed * 1e3,
        o.poured_volume * 1e6,
        o.pour_time,
        pour.iou.unwrap_or(0.0)
    );
    if let Some(out) = args.next() {
        let g = &pour.grid;
        write_gray_pgm(g.width(), g.height(), &g.to_gray(2.0 * spread_thickness(truth.ratio, &params)), &out)?;
    }
    Ok(())
}
