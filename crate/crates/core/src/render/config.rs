use glam::DVec3;

use crate::error::{Error, Result};
use crate::splat::ConfidenceLevel;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderConfig {
    pub level: ConfidenceLevel,
    /// Transmittance below which the second (gradient collection) phase starts.
    pub eps1: f64,
    /// Transmittance of the second phase that terminates the ray.
    pub eps2: f64,
    pub max_gaussians_per_ray: usize,
    /// Ray advance past a hit, relative to the scene diagonal.
    pub advance_eps: f64,
    pub max_bounce_depth: u32,
    pub background: DVec3,
    pub width: u32,
    pub height: u32,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            level: ConfidenceLevel::default(),
            eps1: 1.0 / 255.0,
            eps2: 1e-4,
            max_gaussians_per_ray: 1024,
            advance_eps: 1e-6,
            max_bounce_depth: 4,
            background: DVec3::ZERO,
            width: 64,
            height: 64,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.eps2 && self.eps2 <= self.eps1 && self.eps1 < 1.0) {
            return Err(Error::Validation(format!(
                "thresholds must satisfy 0 < eps2 <= eps1 < 1 (eps1 = {}, eps2 = {})",
                self.eps1, self.eps2
            )));
        }
        if self.max_gaussians_per_ray == 0 {
            return Err(Error::Validation("max_gaussians_per_ray must be at least 1".into()));
        }
        if !(self.advance_eps > 0.0) {
            return Err(Error::Validation("advance_eps must be positive".into()));
        }
        if self.level.q() <= 0.0 {
            return Err(Error::Validation("confidence level must be positive".into()));
        }
        Ok(())
    }
}
