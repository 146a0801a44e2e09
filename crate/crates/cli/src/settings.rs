//! Render and fit settings merged from defaults, an optional TOML/JSON file
//! and command-line flags, in increasing priority.

use std::path::Path;

use anyhow::Context;
use clap::Args;
use glam::DVec3;
use serde::{Deserialize, Serialize};

use octasplat::{ConfidenceLevel, RenderConfig};

use crate::parse::parse_triple;
use crate::UsageError;

#[derive(Debug, Clone, Default, Args)]
pub struct SettingsFlags {
    /// TOML or JSON file with settings; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<std::path::PathBuf>,
    /// Confidence level that sizes the splat polygons.
    #[arg(long, global = true)]
    pub alpha_level: Option<f64>,
    /// Transmittance that starts the second phase.
    #[arg(long, global = true)]
    pub eps1: Option<f64>,
    /// Second-phase transmittance that ends a ray.
    #[arg(long, global = true)]
    pub eps2: Option<f64>,
    /// Capacity of the per-ray index buffer.
    #[arg(long, global = true)]
    pub max_per_ray: Option<usize>,
    /// Worker threads (all cores when omitted).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Background color as r,g,b.
    #[arg(long, global = true, value_parser = parse_triple)]
    pub background: Option<[f64; 3]>,
    /// Maximum mirror/glass bounce depth.
    #[arg(long, global = true)]
    pub depth: Option<u32>,
    /// Image width for cameras that do not record one.
    #[arg(long, global = true)]
    pub width: Option<u32>,
    /// Image height for cameras that do not record one.
    #[arg(long, global = true)]
    pub height: Option<u32>,
}

/// Settings file layout; every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingsFile {
    pub alpha_level: Option<f64>,
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    pub max_per_ray: Option<usize>,
    pub workers: Option<usize>,
    pub background: Option<[f64; 3]>,
    pub depth: Option<u32>,
    pub width: Option<u32>,
    pub height: Option<u32>,
}

impl SettingsFile {
    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let parsed = if is_json {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| UsageError(format!("invalid settings file {}: {e}", path.display())).into())
    }
}

/// Fully resolved settings, logged at the start of every run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub alpha_level: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub max_per_ray: usize,
    pub workers: Option<usize>,
    pub background: [f64; 3],
    pub depth: u32,
    pub width: u32,
    pub height: u32,
}

impl Default for Settings {
    fn default() -> Self {
        let r = RenderConfig::default();
        Self {
            alpha_level: r.level.alpha(),
            eps1: r.eps1,
            eps2: r.eps2,
            max_per_ray: r.max_gaussians_per_ray,
            workers: None,
            background: r.background.to_array(),
            depth: r.max_bounce_depth,
            width: r.width,
            height: r.height,
        }
    }
}

impl Settings {
    pub fn resolve(flags: &SettingsFlags) -> anyhow::Result<Self> {
        let file = match &flags.config {
            Some(path) => SettingsFile::read(path)?,
            None => SettingsFile::default(),
        };
        let d = Settings::default();
        let s = Settings {
            alpha_level: flags.alpha_level.or(file.alpha_level).unwrap_or(d.alpha_level),
            eps1: flags.eps1.or(file.eps1).unwrap_or(d.eps1),
            eps2: flags.eps2.or(file.eps2).unwrap_or(d.eps2),
            max_per_ray: flags.max_per_ray.or(file.max_per_ray).unwrap_or(d.max_per_ray),
            workers: flags.workers.or(file.workers),
            background: flags.background.or(file.background).unwrap_or(d.background),
            depth: flags.depth.or(file.depth).unwrap_or(d.depth),
            width: flags.width.or(file.width).unwrap_or(d.width),
            height: flags.height.or(file.height).unwrap_or(d.height),
        };
        s.render_config()?;
        if s.workers == Some(0) {
            return Err(UsageError("--workers must be at least 1".into()).into());
        }
        if s.width == 0 || s.height == 0 {
            return Err(UsageError("--width and --height must be positive".into()).into());
        }
        Ok(s)
    }

    pub fn level(&self) -> anyhow::Result<ConfidenceLevel> {
        ConfidenceLevel::new(self.alpha_level).map_err(|e| UsageError(format!("--alpha-level: {e}")).into())
    }

    pub fn render_config(&self) -> anyhow::Result<RenderConfig> {
        let config = RenderConfig {
            level: self.level()?,
            eps1: self.eps1,
            eps2: self.eps2,
            max_gaussians_per_ray: self.max_per_ray,
            background: DVec3::from_array(self.background),
            max_bounce_depth: self.depth,
            width: self.width,
            height: self.height,
            ..RenderConfig::default()
        };
        config.validate().map_err(|e| UsageError(e.to_string()))?;
        Ok(config)
    }

    pub fn log(&self, command: &str) {
        log::info!(
            "{command} settings: {}",
            serde_json::to_string(self).expect("settings serialize")
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_which_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.toml");
        std::fs::write(&path, "eps1 = 0.01\ndepth = 2\nbackground = [1.0, 1.0, 1.0]\n").unwrap();
        let flags = SettingsFlags {
            config: Some(path),
            depth: Some(7),
            ..Default::default()
        };
        let s = Settings::resolve(&flags).unwrap();
        assert_eq!(s.eps1, 0.01);
        assert_eq!(s.depth, 7);
        assert_eq!(s.background, [1.0; 3]);
        assert_eq!(s.eps2, 1e-4);
        assert_eq!(s.alpha_level, 0.99);
    }

    #[test]
    fn json_settings_and_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        std::fs::write(&path, r#"{"width": 20, "height": 10}"#).unwrap();
        let s = Settings::resolve(&SettingsFlags {
            config: Some(path.clone()),
            ..Default::default()
        })
        .unwrap();
        assert_eq!((s.width, s.height), (20, 10));
        std::fs::write(&path, r#"{"widht": 20}"#).unwrap();
        let err = Settings::resolve(&SettingsFlags {
            config: Some(path),
            ..Default::default()
        })
        .unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
    }

    #[test]
    fn invalid_thresholds_are_usage_errors() {
        let err = Settings::resolve(&SettingsFlags {
            eps1: Some(1e-6),
            ..Default::default()
        })
        .unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
    }
}
