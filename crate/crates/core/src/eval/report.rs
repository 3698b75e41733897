use std::io::Write;

use serde::{Deserialize, Serialize};

use super::measure::mean_variance;
use super::{EvalError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub ratio: f64,
    pub target: f64,
    pub measured: f64,
    pub abs_error: f64,
    /// Fraction of the target, not percent.
    pub pct_error: f64,
}

impl ReportRow {
    pub fn new(method: &str, ratio: f64, target: f64, measured: f64) -> Self {
        let abs_error = (measured - target).abs();
        Self {
            method: method.to_owned(),
            ratio,
            target,
            measured,
            abs_error,
            pct_error: abs_error / target.abs(),
        }
    }
}

/// Aggregates over one method's rows. Spread statistics are computed within
/// each target group and averaged over groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub n: usize,
    pub mean_error: f64,
    pub mean_pct_error: f64,
    /// Mean over target groups of the variance of the measured values.
    pub variance: f64,
    /// Mean over target groups of std / target.
    pub pct_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
    pub summaries: Vec<MethodSummary>,
}

fn summarize(method: &str, rows: &[&ReportRow]) -> MethodSummary {
    let n = rows.len();
    let mean = |f: fn(&ReportRow) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n as f64;
    let mut targets: Vec<f64> = rows.iter().map(|r| r.target).collect();
    targets.sort_by(f64::total_cmp);
    targets.dedup();
    let (mut var, mut pct) = (0.0, 0.0);
    for &t in &targets {
        let measured: Vec<f64> = rows.iter().filter(|r| r.target == t).map(|r| r.measured).collect();
        let (_, v) = mean_variance(&measured);
        var += v;
        pct += v.sqrt() / t.abs();
    }
    let groups = targets.len() as f64;
    MethodSummary {
        method: method.to_owned(),
        n,
        mean_error: mean(|r| r.abs_error),
        mean_pct_error: mean(|r| r.pct_error),
        variance: var / groups,
        pct_variance: pct / groups,
    }
}

impl ExperimentReport {
    /// Summaries follow the order in which methods first appear in `rows`.
    pub fn new(experiment: &str, seed: u64, rows: Vec<ReportRow>) -> Self {
        let mut methods: Vec<&str> = Vec::new();
        for r in &rows {
            if !methods.contains(&r.method.as_str()) {
                methods.push(&r.method);
            }
        }
        let summaries = methods
            .iter()
            .map(|m| summarize(m, &rows.iter().filter(|r| r.method == *m).collect::<Vec<_>>()))
            .collect();
        Self {
            experiment: experiment.to_owned(),
            seed,
            rows,
            summaries,
        }
    }

    pub fn summary(&self, method: &str) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    /// Whether the stored summaries match the ones recomputed from the rows.
    pub fn is_consistent(&self) -> bool {
        let rows_ok = self.rows.iter().all(|r| {
            let again = ReportRow::new(&r.method, r.ratio, r.target, r.measured);
            again.abs_error == r.abs_error && again.pct_error == r.pct_error
        });
        let fresh = Self::new(&self.experiment, self.seed, self.rows.clone());
        rows_ok
            && fresh.summaries.len() == self.summaries.len()
            && fresh.summaries.iter().zip(&self.summaries).all(|(a, b)| {
                a.method == b.method
                    && a.n == b.n
                    && [
                        (a.mean_error, b.mean_error),
                        (a.mean_pct_error, b.mean_pct_error),
                        (a.variance, b.variance),
                        (a.pct_variance, b.pct_variance),
                    ]
                    .iter()
                    .all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300))
            })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.rows {
            w.serialize(r).map_err(|e| EvalError::Io(format!("report csv: {e}")))?;
        }
        w.flush().map_err(|e| EvalError::Io(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| EvalError::Format(format!("report json: {e}")))
    }

    /// One line per method.
    pub fn summary_table(&self) -> String {
        let mut out = format!("{:<18} {:>4} {:>12} {:>10} {:>12}\n", "method", "n", "mean_err", "pct_err", "pct_var");
        for s in &self.summaries {
            out.push_str(&format!(
                "{:<18} {:>4} {:>12.6} {:>9.2}% {:>11.2}%\n",
                s.method,
                s.n,
                s.mean_error,
                100.0 * s.mean_pct_error,
                100.0 * s.pct_variance
            ));
        }
        out
    }
}
