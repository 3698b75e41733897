use serde::{Deserialize, Serialize};

use super::{segment_batter, ControlError, Result, TILT_RATE};
use crate::planner::BinaryMask;
use crate::sim::{render_gray_frame, spout_mask_sequence, theta_start, BatterTruth, SpoutCamera, SurrogateParams};

/// Deliberate underestimate of the pouring threshold, rad.
pub const INITIAL_ANGLE_MARGIN: f64 = 0.05;
/// Minimum rise over the baseline that counts as flow, px.
const RISE_PX: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DripEvent {
    pub flow_start: usize,
    /// First frame of a three-frame plateau after the flow started.
    pub spout_end: Option<usize>,
}

/// Drip detection on per-frame vertical extents of the batter segment.
///
/// Flow starts at the first frame at least 2 px above the lowest extent seen
/// so far. The batter has reached the spout tip at the first later frame
/// starting three frames whose successive rises are each under 2 px.
pub fn detect_drip_extents(extents: &[usize]) -> Result<DripEvent> {
    if extents.len() < 3 {
        return Err(ControlError::TooFewFrames {
            needed: 3,
            have: extents.len(),
        });
    }
    let mut baseline = extents[0];
    let mut flow_start = None;
    for (f, &e) in extents.iter().enumerate().skip(1) {
        if e >= baseline + RISE_PX {
            flow_start = Some(f);
            break;
        }
        baseline = baseline.min(e);
    }
    let flow_start = flow_start.ok_or(ControlError::NoFlowDetected)?;
    let rise = |f: usize| extents[f + 1].saturating_sub(extents[f]);
    let spout_end = (flow_start + 1..extents.len().saturating_sub(2)).find(|&f| rise(f) < RISE_PX && rise(f + 1) < RISE_PX);
    Ok(DripEvent { flow_start, spout_end })
}

/// [`detect_drip_extents`] on `max_row - min_row` of each mask; empty masks
/// count as extent 0.
pub fn detect_drip(masks: &[BinaryMask]) -> Result<DripEvent> {
    let extents: Vec<usize> = masks.iter().map(|m| m.vertical_extent().unwrap_or(0)).collect();
    detect_drip_extents(&extents)
}

/// Starting tilt for a batter at `level`: the pouring threshold minus `margin`.
pub fn initial_angle(level: f64, params: &SurrogateParams, margin: f64) -> Result<f64> {
    if !(level > 0.0) {
        return Err(ControlError::InvalidParameter(format!("level must be positive, got {level}")));
    }
    Ok((theta_start(level, params) - margin).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PourStart {
    pub initial_angle: f64,
    pub flow_start_frame: usize,
    pub spout_end_frame: usize,
    /// Frame at which the plateau was confirmed and the arm starts moving.
    pub start_frame: usize,
    pub start_angle: f64,
}

/// Tilts from [`initial_angle`] at the constant tilt rate, segmenting each
/// camera frame, until the drip detector confirms batter at the spout tip.
pub fn start_pour(
    estimated_level: f64,
    truth: &BatterTruth,
    params: &SurrogateParams,
    camera: &SpoutCamera,
    seed: u64,
) -> Result<PourStart> {
    let theta0 = initial_angle(estimated_level, params, INITIAL_ANGLE_MARGIN)?;
    let step = TILT_RATE / camera.frame_rate;
    let frames = ((params.theta_max - theta0) / step).floor().max(0.0) as usize + 1;
    let angles: Vec<f64> = (0..frames).map(|k| theta0 + k as f64 * step).collect();
    let seq = spout_mask_sequence(&angles, truth, params, camera, seed)?;
    let mut extents = Vec::with_capacity(frames);
    for (k, mask) in seq.masks.iter().enumerate() {
        let gray = render_gray_frame(mask, seed.wrapping_add(k as u64 + 1));
        let seg = segment_batter(&gray, mask.width(), mask.height(), seed)?;
        extents.push(seg.vertical_extent().unwrap_or(0));
        if extents.len() < 3 {
            continue;
        }
        match detect_drip_extents(&extents) {
            Ok(DripEvent {
                flow_start,
                spout_end: Some(end),
            }) => {
                return Ok(PourStart {
                    initial_angle: theta0,
                    flow_start_frame: flow_start,
                    spout_end_frame: end,
                    start_frame: k,
                    start_angle: angles[k],
                })
            }
            Ok(_) | Err(ControlError::NoFlowDetected) => {}
            Err(e) => return Err(e),
        }
    }
    Err(ControlError::DripNotDetected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::BowlSpec;

    #[test]
    fn hand_traced_example() {
        let e = detect_drip_extents(&[10, 10, 10, 14, 18, 22, 22, 22, 22]).unwrap();
        assert_eq!(e, DripEvent { flow_start: 3, spout_end: Some(5) });
    }

    #[test]
    fn constant_is_no_flow() {
        assert_eq!(detect_drip_extents(&[7; 10]), Err(ControlError::NoFlowDetected));
        assert!(matches!(detect_drip_extents(&[1, 2]), Err(ControlError::TooFewFrames { .. })));
    }

    #[test]
    fn initial_angle_underestimates() {
        let p = SurrogateParams::default();
        for level in [0.005, 0.02, 0.04] {
            assert!(initial_angle(level, &p, INITIAL_ANGLE_MARGIN).unwrap() < theta_start(level, &p));
        }
        assert!(initial_angle(0.04, &p, 0.05).unwrap() < initial_angle(0.02, &p, 0.05).unwrap());
        assert!(initial_angle(0.0, &p, 0.05).is_err());
    }

    #[test]
    fn closed_loop_starts_near_threshold() {
        let p = SurrogateParams::default();
        let truth = BatterTruth::new(1.3, 0.031, BowlSpec::small()).unwrap();
        let s = start_pour(0.0305, &truth, &p, &SpoutCamera::default(), 2).unwrap();
        assert!((s.start_angle - theta_start(truth.level, &p)).abs() < 0.01);
        assert!(s.start_angle >= theta_start(truth.level, &p));
    }
}
