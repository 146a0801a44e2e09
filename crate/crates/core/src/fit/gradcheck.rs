use glam::DVec3;
use rayon::prelude::*;

use super::backward::{backward_ray, composite_fixed_hits, GradientBuffer, PARAMS_PER_SPLAT};
use crate::accel::Ray;
use crate::camera::Camera;
use crate::error::{Error, Result};
use crate::render::{aggregate_color, Image, PreparedScene, RayTraceRecord, RenderConfig};
use crate::scene::Scene;
use crate::splat::FlatGaussian;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamGroup {
    Color,
    Opacity,
    /// Mean, rotation and log in-plane scales, compared with hit points held
    /// fixed.
    Geometry,
}

impl ParamGroup {
    fn slots(self) -> std::ops::Range<usize> {
        match self {
            ParamGroup::Color => 0..3,
            ParamGroup::Opacity => 3..4,
            ParamGroup::Geometry => 4..PARAMS_PER_SPLAT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub compared: usize,
    /// `(splat, slot)` of the largest error.
    pub worst: Option<(usize, usize)>,
}

fn perturb(g: &FlatGaussian, slot: usize, h: f64) -> FlatGaussian {
    let mut g = *g;
    match slot {
        0..3 => g.color[slot] += h,
        3 => g.opacity += h,
        4..7 => g.mean[slot - 4] += h,
        7..11 => {
            let mut q = [g.rotation.w, g.rotation.x, g.rotation.y, g.rotation.z];
            q[slot - 7] += h;
            g.rotation = glam::DQuat::from_xyzw(q[1], q[2], q[3], q[0]).normalize();
        }
        11 => g.scales.y *= h.exp(),
        12 => g.scales.z *= h.exp(),
        _ => unreachable!("slot {slot} out of range"),
    }
    g
}

struct Pixel {
    ray: Ray,
    target: DVec3,
    record: RayTraceRecord,
}

/// Sum of squared errors with fresh ray tracing.
fn traced_loss(splats: &[FlatGaussian], pixels: &[Pixel], config: &RenderConfig) -> f64 {
    let scene = Scene::from_splats(splats.to_vec());
    let prepared = PreparedScene::new(&scene, &config.level);
    let parts: Vec<f64> = pixels
        .par_iter()
        .map(|p| (aggregate_color(&p.ray, &prepared, config).color - p.target).length_squared())
        .collect();
    parts.iter().sum()
}

/// Sum of squared errors re-using the recorded hits.
fn fixed_hit_loss(splats: &[FlatGaussian], pixels: &[Pixel], background: DVec3) -> Result<f64> {
    let parts = pixels
        .par_iter()
        .map(|p| Ok((composite_fixed_hits(&p.record, &p.ray, splats, background)? - p.target).length_squared()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(parts.iter().sum())
}

/// Compare analytic gradients of `sum ||C - target||^2` over one view with
/// central differences of step `step`.
///
/// Color and opacity differences re-trace the rays. Geometry differences
/// re-use the recorded hit distances, matching the fixed-hit convention of
/// the analytic gradient. The relative error uses
/// `max(|analytic|, |numeric|, floor)` with `floor = 1e-6 * max |analytic|`
/// over the compared parameters.
pub fn finite_diff_check(
    splats: &[FlatGaussian],
    camera: &Camera,
    target: &Image,
    config: &RenderConfig,
    group: ParamGroup,
    step: f64,
) -> Result<GradCheckReport> {
    if (camera.width, camera.height) != (target.width(), target.height()) {
        return Err(Error::Contract("camera and target sizes differ".into()));
    }
    let scene = Scene::from_splats(splats.to_vec());
    let prepared = PreparedScene::new(&scene, &config.level);
    let mut pixels = Vec::with_capacity(target.pixels().len());
    for y in 0..camera.height {
        for x in 0..camera.width {
            let ray = camera.ray(x, y);
            pixels.push(Pixel {
                ray,
                target: target.get(x, y),
                record: aggregate_color(&ray, &prepared, config),
            });
        }
    }

    let mut grads = GradientBuffer::zeros(splats.len());
    for p in &pixels {
        let d = 2.0 * (p.record.color - p.target);
        backward_ray(&p.record, &p.ray, splats, config.background, d, &mut grads)?;
    }

    let slots = group.slots();
    let analytic: Vec<[f64; PARAMS_PER_SPLAT]> = grads.as_slice().iter().map(|g| g.to_array()).collect();
    let scale = analytic
        .iter()
        .flat_map(|a| a[slots.clone()].iter().map(|v| v.abs()))
        .fold(0.0, f64::max);
    let floor = 1e-6 * scale + 1e-12;

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        compared: 0,
        worst: None,
    };
    let mut work = splats.to_vec();
    for i in 0..splats.len() {
        for slot in slots.clone() {
            let mut eval = |h: f64| -> Result<f64> {
                work[i] = perturb(&splats[i], slot, h);
                let loss = match group {
                    ParamGroup::Geometry => fixed_hit_loss(&work, &pixels, config.background)?,
                    _ => traced_loss(&work, &pixels, config),
                };
                work[i] = splats[i];
                Ok(loss)
            };
            let numeric = (eval(step)? - eval(-step)?) / (2.0 * step);
            let a = analytic[i][slot];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(floor);
            report.compared += 1;
            if rel > report.max_rel_error || report.worst.is_none() {
                report.max_rel_error = rel.max(report.max_rel_error);
                report.worst = Some((i, slot));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{orbit_cameras, synthetic_scene};

    #[test]
    fn three_splat_fixture_passes_all_groups() {
        let splats = synthetic_scene(3, 21);
        let cam = &orbit_cameras(1, 3.0, 16, 16).unwrap()[0];
        let target = Image::from_pixels(16, 16, vec![DVec3::splat(0.3); 256]);
        let config = RenderConfig::default();
        for (group, tol) in [(ParamGroup::Color, 1e-6), (ParamGroup::Opacity, 1e-4), (ParamGroup::Geometry, 1e-3)] {
            let r = finite_diff_check(&splats, cam, &target, &config, group, 1e-5).unwrap();
            assert!(r.max_rel_error < tol, "{group:?}: {r:?}");
            assert!(r.compared > 0);
        }
    }
}
