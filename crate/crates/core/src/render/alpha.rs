use glam::{DMat3, DVec3};

use crate::accel::Ray;
use crate::splat::FlatGaussian;

/// Splat-plane coordinates `(y, z)` of `p` along `r2` and `r3`.
pub fn in_plane_coords(g: &FlatGaussian, p: DVec3) -> (f64, f64) {
    let [_, r2, r3] = g.axes();
    let v = p - g.mean;
    (r2.dot(v), r3.dot(v))
}

/// Opacity at a point on the splat plane:
/// `opacity * exp(-((y / s2)^2 + (z / s3)^2) / 2)`.
///
/// This is the Mahalanobis form restricted to the plane, so the flat axis
/// scale never enters.
pub fn alpha_at_hit(g: &FlatGaussian, hit_point: DVec3) -> f64 {
    let (y, z) = in_plane_coords(g, hit_point);
    let (u, w) = (y / g.scales.y, z / g.scales.z);
    g.opacity * (-0.5 * (u * u + w * w)).exp()
}

/// Peak of the normalized 3D density along the ray for `t >= 0`, scaled by
/// the splat opacity. Uses the true flat scale, so it blows up numerically
/// for very small `s1`; meant for cross-checking `alpha_at_hit`.
pub fn alpha_peak_oracle(g: &FlatGaussian, ray: &Ray) -> f64 {
    let whiten = DMat3::from_diagonal(g.scales.recip()) * g.frame().transpose();
    let w0 = whiten * (ray.origin - g.mean);
    let wd = whiten * ray.dir;
    let t_star = (-w0.dot(wd) / wd.length_squared()).max(0.0);
    let w = w0 + t_star * wd;
    g.opacity * (-0.5 * w.length_squared()).exp()
}
