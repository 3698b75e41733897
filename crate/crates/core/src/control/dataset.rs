use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{ControlError, Result};
use crate::eval::{measure_disk, measure_stroke_width};
use crate::geom::Point2;
use crate::planner::Stroke;
use crate::sim::{deposit_disk, deposit_stroke, BatterTruth, BowlSpec, DepositionGrid, SurrogateParams, DEFAULT_GRID_RESOLUTION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// (ratio, stroke width) -> arm speed
    Speed,
    /// (ratio, disk diameter) -> pour time
    Time,
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "speed" => Ok(Self::Speed),
            "time" => Ok(Self::Time),
            _ => Err(format!("unknown task `{s}` (speed|time)")),
        }
    }
}

impl Task {
    fn header(self) -> [&'static str; 3] {
        match self {
            Self::Speed => ["ratio", "width_m", "speed_m_s"],
            Self::Time => ["ratio", "diameter_m", "time_s"],
        }
    }
}

/// Rows of `(ratio, width or diameter, speed or time)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub task: Task,
    pub rows: Vec<[f64; 3]>,
}

impl Dataset {
    pub fn features(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| vec![r[0], r[1]]).collect()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[2]).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| ControlError::Format(format!("dataset csv: {e}"));
        w.write_record(self.task.header()).map_err(err)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| v.to_string())).map_err(err)?;
        }
        w.flush().map_err(|e| ControlError::Format(e.to_string()))
    }

    /// The header decides the task.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let err = |e: csv::Error| ControlError::Format(format!("dataset csv: {e}"));
        let header: Vec<String> = r.headers().map_err(err)?.iter().map(str::to_owned).collect();
        let task = [Task::Speed, Task::Time]
            .into_iter()
            .find(|t| t.header().iter().eq(header.iter()))
            .ok_or_else(|| ControlError::Format(format!("dataset csv: unrecognized header {header:?}")))?;
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(err)?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| ControlError::Format(format!("dataset csv row {}: {e}", i + 1)))?;
            if vals.len() != 3 || vals.iter().any(|v| !v.is_finite()) {
                return Err(ControlError::Format(format!("dataset csv row {}: need 3 finite values", i + 1)));
            }
            rows.push([vals[0], vals[1], vals[2]]);
        }
        Ok(Self { task, rows })
    }
}

/// Grid of simulated trials behind a control dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub ratios: Vec<f64>,
    /// Arm speeds (m/s) or pour times (s) to try.
    pub inputs: Vec<f64>,
    /// Measured widths or diameters outside this range are dropped, m.
    pub keep: (f64, f64),
    /// Length of each test line, m.
    pub line_length: f64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect()
}

impl DatasetSpec {
    /// Ratios 1.25..1.45, speeds 4 mm/s..8 cm/s, widths kept in 0.8..5.9 cm.
    pub fn speed_default() -> Self {
        Self {
            ratios: linspace(1.25, 1.45, 9),
            inputs: logspace(0.004, 0.08, 20),
            keep: (0.008, 0.059),
            line_length: 0.10,
        }
    }

    /// Ratios 1.25..1.45, pour times 0.3..120 s, diameters kept in 2..22.5 cm.
    pub fn time_default() -> Self {
        Self {
            ratios: linspace(1.25, 1.45, 9),
            inputs: logspace(0.3, 120.0, 20),
            keep: (0.02, 0.225),
            line_length: 0.0,
        }
    }
}

fn training_truth(ratio: f64) -> Result<BatterTruth> {
    Ok(BatterTruth::new(ratio, 0.04, BowlSpec::large())?)
}

/// Draws straight lines at each (ratio, speed) and records the measured width.
pub fn gen_speed_dataset(spec: &DatasetSpec, params: &SurrogateParams) -> Result<Dataset> {
    let mut rows = Vec::new();
    for &ratio in &spec.ratios {
        let truth = training_truth(ratio)?;
        for &speed in &spec.inputs {
            let stroke = Stroke {
                points: vec![Point2::origin(), Point2::new(spec.line_length, 0.0)],
                closed: false,
            };
            let width_guess = params.flow_rate / (speed * crate::sim::spread_thickness(ratio, params));
            let margin = width_guess + 0.01;
            let mut grid = DepositionGrid::covering(
                Point2::new(-margin, -margin),
                Point2::new(spec.line_length + margin, margin),
                DEFAULT_GRID_RESOLUTION,
            )?;
            deposit_stroke(&mut grid, &stroke.points, false, speed, &truth, params)?;
            let w = measure_stroke_width(&grid, &stroke)?.mean;
            if (spec.keep.0..=spec.keep.1).contains(&w) {
                rows.push([ratio, w, speed]);
            }
        }
    }
    Ok(Dataset { task: Task::Speed, rows })
}

/// Stationary pours of each duration; records the measured disk diameter.
pub fn gen_time_dataset(spec: &DatasetSpec, params: &SurrogateParams) -> Result<Dataset> {
    let mut rows = Vec::new();
    for &ratio in &spec.ratios {
        let truth = training_truth(ratio)?;
        for &time in &spec.inputs {
            let volume = params.flow_rate * time;
            let r = (volume / (std::f64::consts::PI * crate::sim::spread_thickness(ratio, params))).sqrt() + 0.01;
            let mut grid = DepositionGrid::covering(Point2::new(-r, -r), Point2::new(r, r), DEFAULT_GRID_RESOLUTION)?;
            deposit_disk(&mut grid, Point2::origin(), volume, &truth, params)?;
            let d = measure_disk(&grid)?.diameter;
            if (spec.keep.0..=spec.keep.1).contains(&d) {
                rows.push([ratio, d, time]);
            }
        }
    }
    Ok(Dataset { task: Task::Time, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_and_header() {
        let d = Dataset {
            task: Task::Time,
            rows: vec![[1.3, 0.1, 12.5], [1.35, 0.05, 3.25]],
        };
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"ratio,diameter_m,time_s\n"));
        assert_eq!(Dataset::read_csv(&buf[..]).unwrap(), d);
        assert!(Dataset::read_csv("a,b,c\n1,2,3\n".as_bytes()).is_err());
    }

    #[test]
    fn speed_rows_follow_inverse_law() {
        let p = SurrogateParams::default();
        let spec = DatasetSpec {
            ratios: vec![1.3],
            inputs: vec![0.01, 0.02],
            ..DatasetSpec::speed_default()
        };
        let d = gen_speed_dataset(&spec, &p).unwrap();
        assert_eq!(d.rows.len(), 2);
        let ratio = d.rows[0][1] / d.rows[1][1];
        assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
    }
}
