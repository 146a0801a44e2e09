use glam::DVec3;

use super::{alpha_at_hit, PreparedScene, RenderConfig};
use crate::accel::Ray;

/// Terminator written into the indices buffer.
pub const SENTINEL: i64 = -1;

/// Everything the forward pass along one ray leaves behind for the
/// backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct RayTraceRecord {
    pub color: DVec3,
    /// Indices buffer as written: splat indices in traversal order, followed
    /// by one [`SENTINEL`] unless all `capacity` slots were filled. Slots
    /// past the sentinel are never written.
    pub indices: Vec<i64>,
    /// Hit distance along the original ray for each recorded splat.
    pub hit_ts: Vec<f64>,
    /// First-phase transmittance after each recorded splat.
    pub transmittance: Vec<f64>,
    /// Step (0-based) at which the second phase was switched on.
    pub second_phase_start: Option<usize>,
    /// Second-phase transmittance after each recorded splat.
    pub second_transmittance: Vec<f64>,
    /// Transmittance left over for whatever lies behind the last splat.
    pub final_transmittance: f64,
    pub capacity: usize,
}

impl RayTraceRecord {
    /// Recorded splat indices, up to the sentinel.
    pub fn splat_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices
            .iter()
            .take_while(|&&i| i != SENTINEL)
            .map(|&i| i as usize)
    }

    pub fn len(&self) -> usize {
        self.hit_ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hit_ts.is_empty()
    }
}

/// Front-to-back color aggregation along `ray`, compositing the remaining
/// transmittance over `config.background`.
pub fn aggregate_color(ray: &Ray, scene: &PreparedScene<'_>, config: &RenderConfig) -> RayTraceRecord {
    aggregate_over(ray, scene, config, config.background)
}

pub(crate) fn aggregate_over(
    ray: &Ray,
    scene: &PreparedScene<'_>,
    config: &RenderConfig,
    background: DVec3,
) -> RayTraceRecord {
    let capacity = config.max_gaussians_per_ray;
    let advance = scene.advance(config);
    let mut rec = RayTraceRecord {
        color: DVec3::ZERO,
        indices: Vec::new(),
        hit_ts: Vec::new(),
        transmittance: Vec::new(),
        second_phase_start: None,
        second_transmittance: Vec::new(),
        final_transmittance: 1.0,
        capacity,
    };
    let (mut t1, mut t2) = (1.0f64, 1.0f64);
    let mut color = DVec3::ZERO;
    let mut second_phase = false;
    let mut cursor = *ray;

    for k in 0..capacity {
        let Some(hit) = scene.splat_bvh.trace_nearest(&cursor) else {
            rec.indices.push(SENTINEL);
            break;
        };
        let index = hit.triangle_index / crate::mesh::FAN_TRIANGLES;
        rec.indices.push(index as i64);
        rec.hit_ts.push(hit.t);

        let g = &scene.splats[index];
        let alpha = alpha_at_hit(g, ray.at(hit.t));
        color += g.color * (alpha * t1);
        t1 *= 1.0 - alpha;
        if t1 < config.eps1 {
            if !second_phase {
                second_phase = true;
                rec.second_phase_start = Some(k);
            } else {
                t2 *= 1.0 - alpha;
            }
        }
        rec.transmittance.push(t1);
        rec.second_transmittance.push(t2);

        if t2 < config.eps2 {
            if k + 1 < capacity {
                rec.indices.push(SENTINEL);
            }
            break;
        }
        cursor.t_min = hit.t + advance;
    }

    rec.final_transmittance = t1;
    rec.color = color + t1 * background;
    rec
}
