use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{PerceptionError, Result};

/// Push readings ordered by strictly increasing tip height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorqueCurve {
    samples: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct Row {
    tip_height_m: f64,
    torque_nm: f64,
}

impl TorqueCurve {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if let Some(i) = samples.iter().position(|(h, t)| !h.is_finite() || !t.is_finite()) {
            return Err(PerceptionError::NonFinite(i));
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(PerceptionError::HeightsNotIncreasing(i + 1));
        }
        Ok(Self { samples })
    }

    /// Caller guarantees ordering, e.g. the simulator after checking its heights.
    pub(crate) fn from_sorted_unchecked(samples: Vec<(f64, f64)>) -> Self {
        debug_assert!(samples.windows(2).all(|w| w[0].0 < w[1].0));
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn heights(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    pub fn torques(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1).collect()
    }

    /// `(immersion, torque)` pairs for samples strictly below `level`.
    pub fn immersion_pairs(&self, level: f64) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .filter(|(h, _)| *h < level)
            .map(|&(h, t)| (level - h, t))
            .collect()
    }

    /// Two columns, `tip_height_m,torque_nm`, with a header line.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for &(tip_height_m, torque_nm) in &self.samples {
            w.serialize(Row { tip_height_m, torque_nm }).map_err(fmt_err)?;
        }
        w.flush().map_err(|e| PerceptionError::Format(e.to_string()))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let samples = r
            .deserialize::<Row>()
            .map(|row| row.map(|r| (r.tip_height_m, r.torque_nm)).map_err(fmt_err))
            .collect::<Result<Vec<_>>>()?;
        Self::new(samples)
    }
}

fn fmt_err(e: csv::Error) -> PerceptionError {
    PerceptionError::Format(format!("torque curve csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let c = TorqueCurve::new(vec![(0.003, 0.01), (0.006, 0.0051), (0.009, -1e-5)]).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("tip_height_m,torque_nm\n"));
        assert_eq!(TorqueCurve::read_csv(&buf[..]).unwrap(), c);
    }

    #[test]
    fn rejects_unordered() {
        assert_eq!(
            TorqueCurve::new(vec![(0.01, 0.0), (0.005, 0.0)]),
            Err(PerceptionError::HeightsNotIncreasing(1))
        );
        assert!(TorqueCurve::read_csv("tip_height_m,torque_nm\n0.1,x\n".as_bytes()).is_err());
    }
}
