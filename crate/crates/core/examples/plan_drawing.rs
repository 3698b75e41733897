//! PGM drawing to pour trajectory, with an SVG preview.
//!
//! ```text
//! cargo run --example plan_drawing -- crates/core/tests/fixtures/star.pgm star.svg
//! ```

use pancake::planner::{classify_shape, load_pgm, plan, PlanMode};
use pancake::Point2;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let image = args.next().unwrap_or_else(|| "crates/core/tests/fixtures/star.pgm".into());
    let svg = args.next();
    let mask = load_pgm(&image)?;
    let width = 0.01;
    println!("{image}: {}x{} px, {:?}", mask.width(), mask.height(), classify_shape(&mask, width / mask.scale)?);
    let traj = plan(&mask, width, PlanMode::Auto, Point2::origin())?;
    for (i, s) in traj.strokes.iter().enumerate() {
        println!(
            "stroke {i}: {} points, {:.1} mm{}",
            s.points.len(),
            s.length() * 1e3,
            if s.closed { ", closed" } else { "" }
        );
    }
    if let Some(path) = svg {
        std::fs::write(&path, traj.to_svg())?;
        println!("preview written to {path}");
    }
    Ok(())
}
