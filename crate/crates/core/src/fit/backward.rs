use std::ops::AddAssign;

use glam::DVec3;

use crate::accel::Ray;
use crate::error::{Error, Result};
use crate::render::{alpha_at_hit, in_plane_coords, RayTraceRecord};
use crate::splat::FlatGaussian;

/// Scalar parameters per splat in [`SplatGradient::to_array`] order.
pub const PARAMS_PER_SPLAT: usize = 13;

const RECORD_TOLERANCE: f64 = 1e-9;

/// Loss gradient for one splat.
///
/// `opacity` is with respect to the opacity itself, `rotation` with respect
/// to the scalar-first quaternion `(w, x, y, z)` projected onto the tangent
/// of the unit sphere, and `log_scale` with respect to `ln s2` and `ln s3`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SplatGradient {
    pub color: DVec3,
    pub opacity: f64,
    pub mean: DVec3,
    pub rotation: [f64; 4],
    pub log_scale: [f64; 2],
}

impl SplatGradient {
    /// `[color(3), opacity, mean(3), rotation(4), log_scale(2)]`.
    pub fn to_array(&self) -> [f64; PARAMS_PER_SPLAT] {
        let [cr, cg, cb] = self.color.to_array();
        let [mx, my, mz] = self.mean.to_array();
        let [qw, qx, qy, qz] = self.rotation;
        let [s2, s3] = self.log_scale;
        [cr, cg, cb, self.opacity, mx, my, mz, qw, qx, qy, qz, s2, s3]
    }
}

impl AddAssign for SplatGradient {
    fn add_assign(&mut self, rhs: Self) {
        self.color += rhs.color;
        self.opacity += rhs.opacity;
        self.mean += rhs.mean;
        for k in 0..4 {
            self.rotation[k] += rhs.rotation[k];
        }
        self.log_scale[0] += rhs.log_scale[0];
        self.log_scale[1] += rhs.log_scale[1];
    }
}

/// Zero-initialized per-splat gradient accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBuffer {
    grads: Vec<SplatGradient>,
}

impl GradientBuffer {
    pub fn zeros(splat_count: usize) -> Self {
        Self {
            grads: vec![SplatGradient::default(); splat_count],
        }
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }

    pub fn get(&self, splat: usize) -> &SplatGradient {
        &self.grads[splat]
    }

    pub fn as_slice(&self) -> &[SplatGradient] {
        &self.grads
    }

    pub fn scale(&mut self, factor: f64) {
        for g in &mut self.grads {
            let s = *g;
            *g = SplatGradient {
                color: s.color * factor,
                opacity: s.opacity * factor,
                mean: s.mean * factor,
                rotation: s.rotation.map(|v| v * factor),
                log_scale: s.log_scale.map(|v| v * factor),
            };
        }
    }

    pub fn is_zero(&self) -> bool {
        self.grads.iter().all(|g| g.to_array().iter().all(|&v| v == 0.0))
    }
}

impl AddAssign<&GradientBuffer> for GradientBuffer {
    fn add_assign(&mut self, rhs: &GradientBuffer) {
        assert_eq!(self.grads.len(), rhs.grads.len(), "gradient buffers differ in size");
        for (a, b) in self.grads.iter_mut().zip(&rhs.grads) {
            *a += *b;
        }
    }
}

fn recorded_splats(record: &RayTraceRecord, splat_count: usize) -> Result<Vec<usize>> {
    let indices: Vec<usize> = record.splat_indices().collect();
    if indices.len() != record.hit_ts.len() {
        return Err(Error::Contract(format!(
            "record lists {} splats but {} hit distances",
            indices.len(),
            record.hit_ts.len()
        )));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= splat_count) {
        return Err(Error::Contract(format!(
            "record references splat {bad} but the scene has {splat_count}"
        )));
    }
    Ok(indices)
}

/// Re-composite the recorded splats at their recorded hit distances.
///
/// This holds the hit points fixed, which is the convention the geometry
/// gradients follow.
pub fn composite_fixed_hits(
    record: &RayTraceRecord,
    ray: &Ray,
    splats: &[FlatGaussian],
    background: DVec3,
) -> Result<DVec3> {
    let indices = recorded_splats(record, splats.len())?;
    let mut t = 1.0;
    let mut color = DVec3::ZERO;
    for (&i, &hit_t) in indices.iter().zip(&record.hit_ts) {
        let g = &splats[i];
        let alpha = alpha_at_hit(g, ray.at(hit_t));
        color += g.color * (alpha * t);
        t *= 1.0 - alpha;
    }
    Ok(color + t * background)
}

/// Derivatives of the frame columns `r2` and `r3` with respect to the
/// quaternion components `(w, x, y, z)`.
fn frame_column_jacobians(q: [f64; 4]) -> ([DVec3; 4], [DVec3; 4]) {
    let [w, x, y, z] = q.map(|v| 2.0 * v);
    let d_r2 = [
        DVec3::new(-z, 0.0, x),
        DVec3::new(y, -2.0 * x, w),
        DVec3::new(x, 0.0, z),
        DVec3::new(-w, -2.0 * z, y),
    ];
    let d_r3 = [
        DVec3::new(y, -x, 0.0),
        DVec3::new(z, -w, -2.0 * x),
        DVec3::new(w, z, -2.0 * y),
        DVec3::new(x, y, 0.0),
    ];
    (d_r2, d_r3)
}

/// Accumulate the gradient of a loss through one recorded ray, given
/// `d_color = dL/dC` for that ray's color.
///
/// The record must come from aggregating the same splats along the same ray
/// over `background`; otherwise this fails with [`Error::Contract`].
pub fn backward_ray(
    record: &RayTraceRecord,
    ray: &Ray,
    splats: &[FlatGaussian],
    background: DVec3,
    d_color: DVec3,
    grads: &mut GradientBuffer,
) -> Result<()> {
    if grads.len() != splats.len() {
        return Err(Error::Contract(format!(
            "gradient buffer holds {} splats but the scene has {}",
            grads.len(),
            splats.len()
        )));
    }
    let indices = recorded_splats(record, splats.len())?;

    let points: Vec<DVec3> = record.hit_ts.iter().map(|&t| ray.at(t)).collect();
    let alphas: Vec<f64> = indices
        .iter()
        .zip(&points)
        .map(|(&i, &p)| alpha_at_hit(&splats[i], p))
        .collect();
    let mut prefix = Vec::with_capacity(alphas.len());
    let mut t = 1.0;
    let mut color = DVec3::ZERO;
    for (&i, &a) in indices.iter().zip(&alphas) {
        prefix.push(t);
        color += splats[i].color * (a * t);
        t *= 1.0 - a;
    }
    color += t * background;
    let mismatch = (color - record.color).abs().max_element();
    if mismatch > RECORD_TOLERANCE * (1.0 + record.color.abs().max_element()) {
        return Err(Error::Contract(format!(
            "record color differs from the scene by {mismatch:e}"
        )));
    }
    if d_color == DVec3::ZERO {
        return Ok(());
    }

    // Color of everything behind the current splat, composited back to front.
    let mut behind = background;
    for k in (0..indices.len()).rev() {
        let g = &splats[indices[k]];
        let (alpha, t_k, p) = (alphas[k], prefix[k], points[k]);
        let d_alpha = (t_k * (g.color - behind)).dot(d_color);
        behind = g.color * alpha + behind * (1.0 - alpha);

        let out = &mut grads.grads[indices[k]];
        out.color += d_color * (alpha * t_k);

        let (y, z) = in_plane_coords(g, p);
        let (s2, s3) = (g.scales.y, g.scales.z);
        let falloff = (-0.5 * ((y / s2).powi(2) + (z / s3).powi(2))).exp();
        out.opacity += d_alpha * falloff;

        // alpha = opacity * exp(-q / 2) with q = (y / s2)^2 + (z / s3)^2.
        let d_q = d_alpha * (-0.5 * alpha);
        if d_q == 0.0 {
            continue;
        }
        let [_, r2, r3] = g.axes();
        let (ky, kz) = (2.0 * y / (s2 * s2), 2.0 * z / (s3 * s3));
        out.mean += d_q * -(ky * r2 + kz * r3);
        out.log_scale[0] += d_q * -(ky * y);
        out.log_scale[1] += d_q * -(kz * z);

        let v = p - g.mean;
        let (g_r2, g_r3) = (d_q * ky * v, d_q * kz * v);
        let q = [g.rotation.w, g.rotation.x, g.rotation.y, g.rotation.z];
        let (j2, j3) = frame_column_jacobians(q);
        let raw: [f64; 4] = std::array::from_fn(|c| g_r2.dot(j2[c]) + g_r3.dot(j3[c]));
        let radial: f64 = (0..4).map(|c| raw[c] * q[c]).sum();
        for c in 0..4 {
            out.rotation[c] += raw[c] - radial * q[c];
        }
    }
    Ok(())
}
