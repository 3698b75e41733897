use serde::{Deserialize, Serialize};

use super::{BatterTruth, Result, SimError};

/// Length of the preliminary mixing phase, s.
pub const PRELIMINARY_DURATION: f64 = 90.0;
/// Quick-stir rounds per perceptive-stirring trial.
pub const TRIAL_STIR_ROUNDS: u32 = 50;
/// Effective stirring time credited to one trial of 50 quick-stir rounds, s.
/// Covers the rounds themselves plus lowering, push and repositioning.
pub const TRIAL_STIR_DURATION: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StirKind {
    QuickStir,
    FineStir,
    EdgeScrape,
    WhiskShake,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StirSpeed {
    RadPerSec(f64),
    Hertz(f64),
}

/// Whisk motion parameters. Depth is commanded as `level - depth_offset`,
/// path radius as `bowl_radius + radius_offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StirMotion {
    pub kind: StirKind,
    pub speed: StirSpeed,
    pub depth_offset: f64,
    pub radius_offset: Option<f64>,
    pub rotation: bool,
    /// Stirring progress credited per second of this motion.
    pub uniformity_rate: f64,
}

impl StirMotion {
    pub fn quick_stir() -> Self {
        Self {
            kind: StirKind::QuickStir,
            speed: StirSpeed::RadPerSec(15.7),
            depth_offset: 0.002,
            radius_offset: Some(-0.002),
            rotation: false,
            uniformity_rate: 1.0,
        }
    }

    pub fn fine_stir() -> Self {
        Self {
            kind: StirKind::FineStir,
            speed: StirSpeed::RadPerSec(6.28),
            depth_offset: 0.005,
            radius_offset: Some(0.0),
            rotation: true,
            uniformity_rate: 0.5,
        }
    }

    pub fn edge_scrape() -> Self {
        Self {
            kind: StirKind::EdgeScrape,
            speed: StirSpeed::RadPerSec(3.14),
            depth_offset: 0.015,
            radius_offset: Some(0.002),
            rotation: true,
            uniformity_rate: 0.3,
        }
    }

    pub fn whisk_shake() -> Self {
        Self {
            kind: StirKind::WhiskShake,
            speed: StirSpeed::Hertz(8.0),
            depth_offset: 0.005,
            radius_offset: None,
            rotation: false,
            uniformity_rate: 0.4,
        }
    }

    pub fn of_kind(kind: StirKind) -> Self {
        match kind {
            StirKind::QuickStir => Self::quick_stir(),
            StirKind::FineStir => Self::fine_stir(),
            StirKind::EdgeScrape => Self::edge_scrape(),
            StirKind::WhiskShake => Self::whisk_shake(),
        }
    }

    pub fn whisk_depth(&self, level: f64) -> f64 {
        (level - self.depth_offset).max(0.0)
    }

    pub fn path_radius(&self, bowl_radius: f64) -> Option<f64> {
        self.radius_offset.map(|dr| bowl_radius + dr)
    }

    /// Wall time for `rounds` revolutions of a circular motion.
    pub fn rounds_duration(&self, rounds: u32) -> Option<f64> {
        match self.speed {
            StirSpeed::RadPerSec(w) => Some(rounds as f64 * std::f64::consts::TAU / w),
            StirSpeed::Hertz(_) => None,
        }
    }
}

pub fn apply_stir_motion(
    truth: &BatterTruth,
    motion: &StirMotion,
    duration: f64,
) -> Result<BatterTruth> {
    if !(duration > 0.0) {
        return Err(SimError::InvalidParameter(format!(
            "stir duration must be positive, got {duration}"
        )));
    }
    Ok(BatterTruth {
        stir_progress: truth.stir_progress + duration * motion.uniformity_rate,
        ..*truth
    })
}

/// Quick stirring, edge scraping, fine stirring and whisk shaking sharing the
/// 90 s preliminary phase equally.
pub fn preliminary_sequence() -> Vec<(StirMotion, f64)> {
    let share = PRELIMINARY_DURATION / 4.0;
    [
        StirMotion::quick_stir(),
        StirMotion::edge_scrape(),
        StirMotion::fine_stir(),
        StirMotion::whisk_shake(),
    ]
    .into_iter()
    .map(|m| (m, share))
    .collect()
}

pub fn run_preliminary(truth: &BatterTruth) -> BatterTruth {
    preliminary_sequence()
        .iter()
        .fold(*truth, |t, (m, d)| apply_stir_motion(&t, m, *d).expect("positive duration"))
}

/// One perceptive-stirring trial worth of quick stirring.
pub fn quick_stir_trial(truth: &BatterTruth) -> BatterTruth {
    apply_stir_motion(truth, &StirMotion::quick_stir(), TRIAL_STIR_DURATION)
        .expect("positive duration")
}
