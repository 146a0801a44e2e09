use glam::DVec3;

use super::aggregate::aggregate_over;
use super::{alpha_at_hit, PreparedScene, RenderConfig};
use crate::accel::{Hit, Ray};
use crate::scene::{MaterialKind, PointLight};

/// Radiance along `ray`: splats in front of the nearest solid surface are
/// composited over that surface's shaded radiance. Without a solid hit this
/// is plain splat aggregation over the background.
pub fn shade_pixel(ray: &Ray, scene: &PreparedScene<'_>, config: &RenderConfig, depth: u32) -> DVec3 {
    match scene.solid_bvh.trace_nearest(ray) {
        None => aggregate_over(ray, scene, config, config.background).color,
        Some(hit) => {
            let front = aggregate_over(&ray.with_t_max(hit.t), scene, config, DVec3::ZERO);
            if front.final_transmittance == 0.0 {
                return front.color;
            }
            let surface = surface_radiance(ray, &hit, scene, config, depth);
            front.color + front.final_transmittance * surface
        }
    }
}

fn surface_radiance(ray: &Ray, hit: &Hit, scene: &PreparedScene<'_>, config: &RenderConfig, depth: u32) -> DVec3 {
    let tri = scene.solid(hit.triangle_index);
    let point = ray.at(hit.t);
    let entering = tri.normal.dot(ray.dir) < 0.0;
    let facing = if entering { tri.normal } else { -tri.normal };
    let advance = scene.advance(config);
    let material = tri.material;

    let recurse = |dir: DVec3| {
        if depth >= config.max_bounce_depth {
            return DVec3::ZERO;
        }
        let next = Ray::new(point, dir).with_t_min(advance);
        shade_pixel(&next, scene, config, depth + 1)
    };

    match material.kind {
        MaterialKind::Diffuse => {
            let mut irradiance = DVec3::ZERO;
            for light in scene.lights {
                let to_light = light.position - point;
                let cos = facing.dot(to_light.normalize_or_zero());
                if cos <= 0.0 {
                    continue;
                }
                let visibility = shadow_transmittance(point, light, scene, config);
                irradiance += light.intensity * (cos * visibility);
            }
            material.albedo * irradiance
        }
        MaterialKind::Mirror => material.albedo * recurse(reflect(ray.dir, facing)),
        MaterialKind::Glass => {
            let eta = if entering { 1.0 / material.ior } else { material.ior };
            let dir = refract(ray.dir, facing, eta).unwrap_or_else(|| reflect(ray.dir, facing));
            material.albedo * recurse(dir)
        }
    }
}

fn reflect(d: DVec3, n: DVec3) -> DVec3 {
    d - 2.0 * d.dot(n) * n
}

/// Snell refraction of `d` through a surface with normal `n` facing the
/// incoming ray; `None` on total internal reflection.
fn refract(d: DVec3, n: DVec3, eta: f64) -> Option<DVec3> {
    let cos_i = -d.dot(n);
    let k = 1.0 - eta * eta * (1.0 - cos_i * cos_i);
    (k >= 0.0).then(|| eta * d + (eta * cos_i - k.sqrt()) * n)
}

/// Fraction of light from `light` reaching `point`: the product of
/// `1 - alpha` over splats crossed by the segment, or zero when a solid is
/// in the way.
pub fn shadow_transmittance(point: DVec3, light: &PointLight, scene: &PreparedScene<'_>, config: &RenderConfig) -> f64 {
    let to_light = light.position - point;
    let distance = to_light.length();
    if distance == 0.0 {
        return 1.0;
    }
    let advance = scene.advance(config);
    let segment = Ray::new(point, to_light).with_t_min(advance).with_t_max(distance);
    if scene.solid_bvh.trace_nearest(&segment).is_some() {
        return 0.0;
    }
    let mut transmittance = 1.0;
    let mut cursor = segment;
    for _ in 0..config.max_gaussians_per_ray {
        let Some(hit) = scene.splat_bvh.trace_nearest(&cursor) else {
            break;
        };
        let Some(index) = hit.splat_index() else { break };
        transmittance *= 1.0 - alpha_at_hit(&scene.splats[index], segment.at(hit.t));
        if transmittance == 0.0 {
            break;
        }
        cursor.t_min = hit.t + advance;
    }
    transmittance
}
