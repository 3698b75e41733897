use serde::{Deserialize, Serialize};

use super::{analytic_speed, predict_speed, ControlError, MlpModel, Result};
use crate::geom::Point2;
use crate::planner::Trajectory;
use crate::sim::{BowlSpec, SurrogateParams};

/// Tilt rate while approaching the pouring threshold, rad/s.
pub const TILT_RATE: f64 = 0.007;
/// Pen-up travel speed between strokes, m/s.
pub const TRAVEL_SPEED: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pen {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    /// s from the first pen-down.
    pub t: f64,
    pub position: Point2,
    /// Tilt held from this waypoint to the next, rad.
    pub tilt: f64,
    pub pen: Pen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedStroke {
    pub points: Vec<Point2>,
    pub closed: bool,
    /// m/s
    pub speed: f64,
}

impl PlannedStroke {
    pub fn length(&self) -> f64 {
        let mut path = self.points.clone();
        if self.closed {
            path.push(self.points[0]);
        }
        crate::geom::polyline_length(&path)
    }

    pub fn duration(&self) -> f64 {
        self.length() / self.speed
    }

    fn end(&self) -> Point2 {
        if self.closed {
            self.points[0]
        } else {
            *self.points.last().expect("nonempty stroke")
        }
    }
}

/// Timed arm program for one drawing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PourPlan {
    pub ratio: f64,
    pub stroke_width: f64,
    /// Tilt at the first pen-down, rad.
    pub start_angle: f64,
    /// Tilt increase per second of pouring that keeps the lip at the level, rad/s.
    pub pour_tilt_rate: f64,
    pub strokes: Vec<PlannedStroke>,
}

impl PourPlan {
    pub fn pour_duration(&self) -> f64 {
        self.strokes.iter().map(PlannedStroke::duration).sum()
    }

    pub fn travel_duration(&self) -> f64 {
        self.strokes
            .windows(2)
            .map(|w| (w[1].points[0] - w[0].end()).norm() / TRAVEL_SPEED)
            .sum()
    }

    pub fn pour_volume(&self, params: &SurrogateParams) -> f64 {
        self.pour_duration() * params.flow_rate
    }

    /// Flattened timeline. The tilt only advances while pouring; pen-up moves
    /// hold it.
    pub fn waypoints(&self) -> Vec<Waypoint> {
        let mut out = Vec::new();
        let (mut t, mut poured) = (0.0, 0.0);
        let tilt = |poured: f64| self.start_angle + self.pour_tilt_rate * poured;
        for (k, s) in self.strokes.iter().enumerate() {
            if k > 0 {
                let from = self.strokes[k - 1].end();
                out.push(Waypoint { t, position: from, tilt: tilt(poured), pen: Pen::Up });
                t += (s.points[0] - from).norm() / TRAVEL_SPEED;
            }
            let mut path = s.points.clone();
            if s.closed {
                path.push(s.points[0]);
            }
            for (i, &p) in path.iter().enumerate() {
                if i > 0 {
                    let dt = (p - path[i - 1]).norm() / s.speed;
                    t += dt;
                    poured += dt;
                }
                if i + 1 < path.len() {
                    out.push(Waypoint { t, position: p, tilt: tilt(poured), pen: Pen::Down });
                }
            }
        }
        if let Some(s) = self.strokes.last() {
            out.push(Waypoint { t, position: s.end(), tilt: tilt(poured), pen: Pen::Up });
        }
        out
    }
}

/// Assigns each stroke the arm speed that lays `trajectory.stroke_width` of
/// batter at `ratio`, from `model` or, without one, the analytic inverse.
pub fn plan_execution(
    trajectory: &Trajectory,
    ratio: f64,
    model: Option<&MlpModel>,
    start_angle: f64,
    bowl: &BowlSpec,
    params: &SurrogateParams,
) -> Result<PourPlan> {
    if trajectory.strokes.is_empty() {
        return Err(ControlError::EmptyTrajectory);
    }
    let w = trajectory.stroke_width;
    if !(w > 0.0) {
        return Err(ControlError::InvalidParameter(format!("stroke width must be positive, got {w}")));
    }
    let speed = match model {
        Some(m) => predict_speed(m, ratio, w)?,
        None => {
            let (lo, hi) = super::SPEED_LIMITS;
            analytic_speed(ratio, w, params).clamp(lo, hi)
        }
    };
    let strokes = trajectory
        .strokes
        .iter()
        .map(|s| PlannedStroke {
            points: s.points.clone(),
            closed: s.closed,
            speed,
        })
        .collect();
    Ok(PourPlan {
        ratio,
        stroke_width: w,
        start_angle,
        pour_tilt_rate: params.c_theta * params.flow_rate / bowl.cross_section_area(),
        strokes,
    })
}
