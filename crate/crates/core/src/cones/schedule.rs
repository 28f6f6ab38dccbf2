use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometric radii `r0·rho^k`, `k = 1..=levels`, each sampled with
/// `samples_per_level` points from a seeded low-discrepancy stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleSchedule {
    pub r0: f64,
    pub rho: f64,
    pub levels: usize,
    pub samples_per_level: usize,
    pub seed: u64,
}

impl Default for ScaleSchedule {
    fn default() -> Self {
        ScaleSchedule { r0: 0.1, rho: 0.5, levels: 14, samples_per_level: 512, seed: 0 }
    }
}

impl ScaleSchedule {
    pub fn new(r0: f64, rho: f64, levels: usize, samples_per_level: usize, seed: u64) -> Result<Self> {
        let s = ScaleSchedule { r0, rho, levels, samples_per_level, seed };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r0.is_finite() && self.r0 > 0.0) {
            return Err(Error::InvalidInput(format!("schedule r0 must be positive, got {}", self.r0)));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidInput(format!("schedule rho must lie in (0,1), got {}", self.rho)));
        }
        if self.levels < 3 {
            return Err(Error::InvalidInput(format!("schedule needs at least 3 levels, got {}", self.levels)));
        }
        if self.samples_per_level < 16 {
            return Err(Error::InvalidInput(format!(
                "schedule needs at least 16 samples per level, got {}",
                self.samples_per_level
            )));
        }
        Ok(())
    }

    /// Radius of level `k` (1-based).
    pub fn radius(&self, k: usize) -> f64 {
        self.r0 * self.rho.powi(k as i32)
    }

    pub fn finest_radius(&self) -> f64 {
        self.radius(self.levels)
    }

    /// `π / (2√M)`: the angular resolution of one level.
    pub fn angular_tol(&self) -> f64 {
        PI / (2.0 * (self.samples_per_level as f64).sqrt())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.levels = levels;
        self
    }

    pub fn with_r0(mut self, r0: f64) -> Self {
        self.r0 = r0;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples_per_level = samples;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule_geometry() {
        let s = ScaleSchedule::default();
        s.validate().unwrap();
        assert!((s.finest_radius() - 0.1 * 0.5f64.powi(14)).abs() < 1e-18);
        assert!((s.finest_radius() - 6.1e-6).abs() < 1e-7);
        assert!((s.angular_tol() - PI / (2.0 * 512f64.sqrt())).abs() < 1e-15);
        assert!((s.with_levels(4).finest_radius() - 6.25e-3).abs() < 1e-15);
    }

    #[test]
    fn invalid_schedules() {
        assert!(ScaleSchedule::new(0.0, 0.5, 14, 512, 0).is_err());
        assert!(ScaleSchedule::new(0.1, 1.0, 14, 512, 0).is_err());
        assert!(ScaleSchedule::new(0.1, 0.5, 2, 512, 0).is_err());
        assert!(ScaleSchedule::new(0.1, 0.5, 3, 15, 0).is_err());
        assert!(ScaleSchedule::new(0.1, 0.5, 3, 16, 0).is_ok());
    }
}
