use serde::{Deserialize, Serialize};

use super::{PourPlan, Result};
use crate::geom::Point2;
use crate::sim::{deposit_stroke, BatterTruth, DepositionGrid, SurrogateParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PourOutcome {
    /// m³ actually landed on the grid.
    pub deposited_volume: f64,
    /// m³ that left the bowl.
    pub poured_volume: f64,
    pub pour_time: f64,
    pub travel_time: f64,
    /// Bowl contents after the pour.
    pub remaining: BatterTruth,
    /// The bowl emptied before the plan finished.
    pub ran_dry: bool,
}

/// Runs `plan` against the surrogate: each stroke pours at the flow rate for
/// its duration until the bowl is empty.
pub fn execute_plan(
    plan: &PourPlan,
    truth: &BatterTruth,
    params: &SurrogateParams,
    grid: &mut DepositionGrid,
) -> Result<PourOutcome> {
    let mut left = truth.volume();
    let (mut deposited, mut poured, mut pour_time) = (0.0, 0.0, 0.0);
    let mut ran_dry = false;
    for s in &plan.strokes {
        if left <= 0.0 {
            ran_dry = true;
            break;
        }
        let need = s.duration() * params.flow_rate;
        let (points, closed, vol) = if need <= left {
            (s.points.clone(), s.closed, need)
        } else {
            ran_dry = true;
            let mut path = s.points.clone();
            if s.closed {
                path.push(s.points[0]);
            }
            (truncate(&path, left / params.flow_rate * s.speed), false, left)
        };
        deposited += deposit_stroke(grid, &points, closed, s.speed, truth, params)?;
        left -= vol;
        poured += vol;
        pour_time += vol / params.flow_rate;
    }
    let remaining = BatterTruth {
        level: (left / truth.bowl.cross_section_area()).max(0.0),
        ..*truth
    };
    Ok(PourOutcome {
        deposited_volume: deposited,
        poured_volume: poured,
        pour_time,
        travel_time: plan.travel_duration(),
        remaining,
        ran_dry,
    })
}

fn truncate(path: &[Point2], length: f64) -> Vec<Point2> {
    let mut out = vec![path[0]];
    let mut acc = 0.0;
    for w in path.windows(2) {
        let seg = (w[1] - w[0]).norm();
        if acc + seg >= length {
            if seg > 0.0 {
                out.push(w[0] + (w[1] - w[0]) * ((length - acc) / seg));
            }
            break;
        }
        acc += seg;
        out.push(w[1]);
    }
    if out.len() == 1 {
        out.push(path[0]);
    }
    out
}
