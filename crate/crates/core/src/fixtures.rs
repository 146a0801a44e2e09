//! Seeded synthetic scenes and camera rigs for tests, demos and the
//! desk-scale fit.

use std::f64::consts::{PI, TAU};

use glam::{DQuat, DVec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::camera::Camera;
use crate::error::Result;
use crate::splat::{flatten, FlatGaussian};

/// Flat epsilon used by the fixtures.
pub const FIXTURE_EPS_FLAT: f64 = 1e-6;

/// Uniformly distributed unit quaternion.
pub fn random_rotation(rng: &mut impl Rng) -> DQuat {
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    DQuat::from_xyzw(a * (TAU * u2).sin(), a * (TAU * u2).cos(), b * (TAU * u3).sin(), b * (TAU * u3).cos())
        .normalize()
}

fn random_vec(rng: &mut impl Rng, lo: f64, hi: f64) -> DVec3 {
    DVec3::new(rng.random_range(lo..hi), rng.random_range(lo..hi), rng.random_range(lo..hi))
}

fn random_splat(rng: &mut impl Rng, extent: f64, scale: (f64, f64), opacity: (f64, f64), color: (f64, f64)) -> FlatGaussian {
    let mean = random_vec(rng, -extent, extent);
    let rotation = random_rotation(rng);
    let s = DVec3::new(
        FIXTURE_EPS_FLAT,
        rng.random_range(scale.0..scale.1),
        rng.random_range(scale.0..scale.1),
    );
    let alpha = rng.random_range(opacity.0..opacity.1);
    let c = random_vec(rng, color.0, color.1);
    flatten(mean, rotation, s, alpha, c, FIXTURE_EPS_FLAT).expect("fixture parameters are valid")
}

/// Ground-truth style scene: `count` fairly opaque, saturated splats near the
/// origin.
pub fn synthetic_scene(count: usize, seed: u64) -> Vec<FlatGaussian> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_splat(&mut rng, 0.5, (0.2, 0.45), (0.7, 0.95), (0.05, 0.95)))
        .collect()
}

/// Initial guess for fitting: `count` small, grey, half-transparent splats
/// spread over `[-extent, extent]^3`.
pub fn random_init(count: usize, seed: u64, extent: f64) -> Vec<FlatGaussian> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_splat(&mut rng, extent, (0.1, 0.2), (0.3, 0.6), (0.3, 0.7)))
        .collect()
}

/// `count` cameras on a circle of `radius` around the y axis, 30 degrees
/// above the horizon, looking at the origin.
pub fn orbit_cameras(count: usize, radius: f64, width: u32, height: u32) -> Result<Vec<Camera>> {
    let elevation = PI / 6.0;
    (0..count)
        .map(|k| {
            let azimuth = TAU * k as f64 / count as f64;
            let eye = radius
                * DVec3::new(
                    elevation.cos() * azimuth.sin(),
                    elevation.sin(),
                    elevation.cos() * azimuth.cos(),
                );
            let mut cam = Camera::look_at(eye, DVec3::ZERO, DVec3::Y, 50f64.to_radians(), width, height)?;
            cam.name = Some(format!("view_{k:03}"));
            Ok(cam)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_scenes_are_reproducible() {
        assert_eq!(synthetic_scene(5, 3), synthetic_scene(5, 3));
        assert_ne!(synthetic_scene(5, 3), synthetic_scene(5, 4));
        for g in synthetic_scene(20, 9).iter().chain(&random_init(20, 9, 0.7)) {
            g.validate().unwrap();
        }
    }

    #[test]
    fn orbit_cameras_look_at_origin() {
        for cam in orbit_cameras(4, 3.0, 8, 8).unwrap() {
            assert!((cam.position.length() - 3.0).abs() < 1e-12);
            assert!(cam.forward().dot(-cam.position.normalize()) > 1.0 - 1e-12);
        }
    }
}
