use serde::{Deserialize, Serialize};

use super::{Result, SimError};
use crate::geom::Point2;

/// kg/m³
pub const WATER_DENSITY: f64 = 1000.0;
/// Particle density of wheat flour, kg/m³. Batter volume is treated as additive.
pub const FLOUR_DENSITY: f64 = 1500.0;

/// Cylindrical mixing bowl.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BowlSpec {
    pub center: Point2,
    /// m
    pub radius: f64,
    /// m
    pub interior_height: f64,
}

impl BowlSpec {
    pub fn new(center: Point2, radius: f64, interior_height: f64) -> Result<Self> {
        let bowl = Self {
            center,
            radius,
            interior_height,
        };
        bowl.validate()?;
        Ok(bowl)
    }

    /// 8.3 cm radius, 1100 ml.
    pub fn small() -> Self {
        Self::from_volume(0.083, 1.1e-3)
    }

    /// 10.5 cm radius, 2200 ml.
    pub fn large() -> Self {
        Self::from_volume(0.105, 2.2e-3)
    }

    fn from_volume(radius: f64, volume: f64) -> Self {
        Self {
            center: Point2::origin(),
            radius,
            interior_height: volume / (std::f64::consts::PI * radius * radius),
        }
    }

    pub fn cross_section_area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(SimError::InvalidParameter(format!(
                "bowl radius must be positive, got {}",
                self.radius
            )));
        }
        if !(self.interior_height > 0.0) {
            return Err(SimError::InvalidParameter(format!(
                "bowl interior height must be positive, got {}",
                self.interior_height
            )));
        }
        Ok(())
    }
}

/// Hidden simulator state of one bowl of batter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatterTruth {
    /// Water mass over flour mass.
    pub ratio: f64,
    /// Liquid level above the bowl bottom, m.
    pub level: f64,
    /// Accumulated effective stirring time, s.
    pub stir_progress: f64,
    pub bowl: BowlSpec,
}

impl BatterTruth {
    pub const RATIO_RANGE: (f64, f64) = (0.8, 2.0);

    pub fn new(ratio: f64, level: f64, bowl: BowlSpec) -> Result<Self> {
        let truth = Self {
            ratio,
            level,
            stir_progress: 0.0,
            bowl,
        };
        truth.validate()?;
        Ok(truth)
    }

    /// Batter made from `total_mass` kg of water and flour mixed at `ratio`.
    pub fn from_mass(ratio: f64, total_mass: f64, bowl: BowlSpec) -> Result<Self> {
        let water = total_mass * ratio / (1.0 + ratio);
        let flour = total_mass - water;
        let volume = water / WATER_DENSITY + flour / FLOUR_DENSITY;
        Self::new(ratio, volume / bowl.cross_section_area(), bowl)
    }

    /// Batter made from `water_mass` kg of water plus the matching flour.
    pub fn from_water(ratio: f64, water_mass: f64, bowl: BowlSpec) -> Result<Self> {
        Self::from_mass(ratio, water_mass * (1.0 + ratio) / ratio, bowl)
    }

    pub fn volume(&self) -> f64 {
        self.level * self.bowl.cross_section_area()
    }

    pub fn validate(&self) -> Result<()> {
        self.bowl.validate()?;
        let (lo, hi) = Self::RATIO_RANGE;
        if !(lo..=hi).contains(&self.ratio) {
            return Err(SimError::InvalidParameter(format!(
                "water-flour ratio {} outside [{lo}, {hi}]",
                self.ratio
            )));
        }
        if !(self.level > 0.0 && self.level <= self.bowl.interior_height) {
            return Err(SimError::InvalidParameter(format!(
                "liquid level {} m outside (0, {}]",
                self.level, self.bowl.interior_height
            )));
        }
        if !(self.stir_progress >= 0.0) {
            return Err(SimError::InvalidParameter(format!(
                "stir progress must be nonnegative, got {}",
                self.stir_progress
            )));
        }
        Ok(())
    }
}

/// Free constants of the surrogate batter model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurrogateParams {
    /// Torque per metre of immersion at ratio 0 and no stirring, N·m/m.
    pub kappa: f64,
    /// Exponential ratio decay, 1/ratio.
    pub beta: f64,
    /// Stirring time constant, s.
    pub tau_u: f64,
    /// Stirring power-law exponent.
    pub alpha: f64,
    /// Batter-push noise as a fraction of the batter's full-immersion torque.
    pub sigma_batter_frac: f64,
    /// Sensor noise floor, N·m. Present on every push.
    pub sigma_air: f64,
    /// Spread thickness at ratio 1, m.
    pub thickness0: f64,
    /// Spread-thickness decay with ratio.
    pub gamma: f64,
    /// Quasi-static outflow once pouring, m³/s.
    pub flow_rate: f64,
    /// Tilt at which an empty bowl would start pouring, rad.
    pub theta_max: f64,
    /// Reduction of the pouring threshold per metre of liquid level, rad/m.
    pub c_theta: f64,
    /// Batter film on the spout and lip that drains after a held pour, m³.
    pub spout_film_volume: f64,
}

impl Default for SurrogateParams {
    fn default() -> Self {
        Self {
            kappa: 1.2,
            beta: 1.5,
            tau_u: 120.0,
            alpha: 0.35,
            sigma_batter_frac: 0.02,
            sigma_air: 2e-5,
            thickness0: 3e-3,
            gamma: 0.8,
            flow_rate: 1e-6,
            theta_max: 1.2,
            c_theta: 15.0,
            spout_film_volume: 3e-6,
        }
    }
}

impl SurrogateParams {
    /// Same constants with both noise terms switched off.
    pub fn noise_free(self) -> Self {
        Self {
            sigma_batter_frac: 0.0,
            sigma_air: 0.0,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("kappa", self.kappa),
            ("beta", self.beta),
            ("tau_u", self.tau_u),
            ("alpha", self.alpha),
            ("thickness0", self.thickness0),
            ("gamma", self.gamma),
            ("flow_rate", self.flow_rate),
            ("theta_max", self.theta_max),
            ("c_theta", self.c_theta),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        let nonneg = [
            ("sigma_batter_frac", self.sigma_batter_frac),
            ("sigma_air", self.sigma_air),
            ("spout_film_volume", self.spout_film_volume),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(SimError::InvalidParameter(format!(
                    "{name} must be nonnegative and finite, got {v}"
                )));
            }
        }
        if self.theta_max >= std::f64::consts::FRAC_PI_2 {
            return Err(SimError::InvalidParameter(format!(
                "theta_max must be below pi/2, got {}",
                self.theta_max
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bowl_heights_follow_volume() {
        let small = BowlSpec::small();
        assert!((small.interior_height - 0.050_83).abs() < 1e-4);
        let large = BowlSpec::large();
        assert!((large.interior_height - 0.063_52).abs() < 1e-4);
    }

    #[test]
    fn truth_rejects_out_of_range() {
        let bowl = BowlSpec::small();
        assert!(BatterTruth::new(0.5, 0.02, bowl).is_err());
        assert!(BatterTruth::new(1.2, 0.0, bowl).is_err());
        assert!(BatterTruth::new(1.2, 0.2, bowl).is_err());
        assert!(BatterTruth::new(1.2, 0.02, bowl).is_ok());
    }

    #[test]
    fn water_protocol_levels_are_plausible() {
        // ~300 g of water per training batch
        let t = BatterTruth::from_water(1.25, 0.3, BowlSpec::small()).unwrap();
        assert!(t.level > 0.015 && t.level < 0.03, "{}", t.level);
    }

    #[test]
    fn default_params_valid_and_noise_free_keeps_rest() {
        let p = SurrogateParams::default();
        p.validate().unwrap();
        let q = p.noise_free();
        assert_eq!(q.sigma_air, 0.0);
        assert_eq!(q.kappa, p.kappa);
        q.validate().unwrap();
        let bad = SurrogateParams { kappa: -1.0, ..p };
        assert!(bad.validate().is_err());
    }
}
