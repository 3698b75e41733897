//! Spout camera frames, k-means segmentation and the drip detector.

use pancake::control::{detect_drip, segment_batter, start_pour};
use pancake::sim::{render_gray_frame, spout_mask_sequence, theta_start, BatterTruth, BowlSpec, SpoutCamera, SurrogateParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = SurrogateParams::default();
    let truth = BatterTruth::new(1.3, 0.028, BowlSpec::small())?;
    let camera = SpoutCamera::default();
    let th = theta_start(truth.level, &params);
    let angles: Vec<f64> = (0..30).map(|k| th - 0.01 + 0.0007 * k as f64).collect();
    let seq = spout_mask_sequence(&angles, &truth, &params, &camera, 4)?;
    let segmented = seq
        .masks
        .iter()
        .enumerate()
        .map(|(k, m)| segment_batter(&render_gray_frame(m, k as u64), m.width(), m.height(), 0))
        .collect::<Result<Vec<_>, _>>()?;
    let event = detect_drip(&segmented)?;
    println!("extents {:?}", seq.extents());
    println!(
        "detected flow {} / spout {:?}; generator {:?} / {:?}",
        event.flow_start, event.spout_end, seq.flow_start, seq.spout_end
    );

    let start = start_pour(truth.level, &truth, &params, &camera, 9)?;
    println!(
        "closed loop: tilt from {:.4} rad, pour at {:.4} rad (threshold {th:.4})",
        start.initial_angle, start.start_angle
    );
    Ok(())
}
