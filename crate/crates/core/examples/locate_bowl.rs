//! Bowl centre and radius from four jittered wall contacts.

use pancake::perception::fit_circle;
use pancake::sim::{probe_contacts, BowlSpec};
use pancake::Point2;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bowl = BowlSpec::new(Point2::new(0.41, -0.12), 0.105, 0.0635)?;
    let start = Point2::new(0.42, -0.11);
    for jitter in [0.0, 2e-4, 5e-4] {
        let contacts = probe_contacts(&bowl, start, jitter, 11)?;
        let c = fit_circle(&contacts)?;
        println!(
            "jitter {:.1} mm: centre ({:.4}, {:.4}) radius {:.2} mm, error {:.3} mm",
            jitter * 1e3,
            c.center.x,
            c.center.y,
            c.radius * 1e3,
            (c.radius - bowl.radius).abs() * 1e3
        );
    }
    Ok(())
}
