use glam::DVec3;

use crate::mesh::FAN_TRIANGLES;

/// Barycentric slack so rays through a shared edge register on both sides.
const BARYCENTRIC_TOLERANCE: f64 = 1e-12;
/// Rays closer than this (cosine) to the triangle plane count as parallel.
const PARALLEL_COSINE: f64 = 1e-12;

/// `r(t) = origin + t * dir` restricted to `t_min < t < t_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: DVec3,
    pub dir: DVec3,
    pub t_min: f64,
    pub t_max: f64,
}

impl Ray {
    /// Normalizes `dir`.
    pub fn new(origin: DVec3, dir: DVec3) -> Self {
        Self {
            origin,
            dir: dir.normalize(),
            t_min: 0.0,
            t_max: f64::INFINITY,
        }
    }

    pub fn with_t_min(self, t_min: f64) -> Self {
        Self { t_min, ..self }
    }

    pub fn with_t_max(self, t_max: f64) -> Self {
        Self { t_max, ..self }
    }

    pub fn at(&self, t: f64) -> DVec3 {
        self.origin + t * self.dir
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TriangleKind {
    Splat,
    Solid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub triangle_index: usize,
    pub kind: TriangleKind,
}

impl Hit {
    /// Owning splat, relying on six consecutive fan triangles per splat.
    pub fn splat_index(&self) -> Option<usize> {
        match self.kind {
            TriangleKind::Splat => Some(self.triangle_index / FAN_TRIANGLES),
            TriangleKind::Solid => None,
        }
    }

    /// Strict ordering used for nearest-hit selection: smaller `t` first,
    /// then smaller triangle index.
    pub(crate) fn precedes(t: f64, index: usize, best: Option<(f64, usize)>) -> bool {
        match best {
            None => true,
            Some((bt, bi)) => t < bt || (t == bt && index < bi),
        }
    }
}

/// Two-sided Moller-Trumbore intersection. Returns the hit distance when it
/// lies strictly inside `(t_min, t_max)`.
pub fn ray_triangle_intersect(ray: &Ray, v0: DVec3, v1: DVec3, v2: DVec3) -> Option<f64> {
    let e1 = v1 - v0;
    let e2 = v2 - v0;
    let p = ray.dir.cross(e2);
    let det = e1.dot(p);
    let normal_len = e1.cross(e2).length();
    if !(det.abs() > PARALLEL_COSINE * normal_len) {
        return None;
    }
    let inv_det = 1.0 / det;
    let s = ray.origin - v0;
    let u = s.dot(p) * inv_det;
    if !(-BARYCENTRIC_TOLERANCE..=1.0 + BARYCENTRIC_TOLERANCE).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = ray.dir.dot(q) * inv_det;
    if v < -BARYCENTRIC_TOLERANCE || u + v > 1.0 + BARYCENTRIC_TOLERANCE {
        return None;
    }
    let t = e2.dot(q) * inv_det;
    (t > ray.t_min && t < ray.t_max).then_some(t)
}
