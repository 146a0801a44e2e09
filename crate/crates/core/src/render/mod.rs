//! Ray-traced color aggregation over splat proxies, secondary rays against
//! solid meshes, and image assembly.

mod aggregate;
mod alpha;
mod config;
mod image;
mod shade;

use glam::DVec3;
use rayon::prelude::*;

pub use aggregate::{aggregate_color, RayTraceRecord, SENTINEL};
pub use alpha::{alpha_at_hit, alpha_peak_oracle, in_plane_coords};
pub use config::RenderConfig;
pub use image::{linear_to_srgb, srgb_to_linear, Image};
pub use shade::{shade_pixel, shadow_transmittance};

pub use crate::camera::camera_ray;

use crate::accel::{Aabb, Bvh, TriangleKind};
use crate::camera::Camera;
use crate::error::{Error, Result};
use crate::mesh::polygon_vertices;
use crate::scene::{Material, PointLight, Scene};
use crate::splat::{ConfidenceLevel, FlatGaussian};

#[derive(Debug, Clone, Copy)]
struct SolidTriangle {
    normal: DVec3,
    material: Material,
}

/// A scene with its acceleration structures built for one confidence level.
#[derive(Debug, Clone)]
pub struct PreparedScene<'a> {
    pub splats: &'a [FlatGaussian],
    pub lights: &'a [PointLight],
    pub splat_bvh: Bvh,
    pub solid_bvh: Bvh,
    solid_triangles: Vec<SolidTriangle>,
    diagonal: f64,
}

impl<'a> PreparedScene<'a> {
    pub fn new(scene: &'a Scene, level: &ConfidenceLevel) -> Self {
        let mut bounds = Aabb::EMPTY;
        let splat_tris: Vec<(usize, [DVec3; 3])> = scene
            .splats
            .iter()
            .enumerate()
            .flat_map(|(k, g)| {
                let p = polygon_vertices(g, level);
                crate::mesh::FAN_INDICES
                    .iter()
                    .enumerate()
                    .map(move |(j, t)| (6 * k + j, [p[t[0]], p[t[1]], p[t[2]]]))
            })
            .inspect(|(_, t)| bounds = t.iter().fold(bounds, |b, v| b.grow(*v)))
            .collect();

        let mut solid_tris = Vec::new();
        let mut solid_triangles = Vec::new();
        for mesh in &scene.solids {
            for tri in mesh.world_triangles() {
                let [a, b, c] = tri;
                bounds = tri.iter().fold(bounds, |bb, v| bb.grow(*v));
                solid_triangles.push(SolidTriangle {
                    normal: (b - a).cross(c - a).normalize_or_zero(),
                    material: mesh.material,
                });
                solid_tris.push((solid_tris.len(), tri));
            }
        }

        let diagonal = bounds.diagonal();
        Self {
            splats: &scene.splats,
            lights: &scene.lights,
            splat_bvh: Bvh::build(splat_tris, TriangleKind::Splat),
            solid_bvh: Bvh::build(solid_tris, TriangleKind::Solid),
            solid_triangles,
            diagonal: if diagonal > 0.0 && diagonal.is_finite() { diagonal } else { 1.0 },
        }
    }

    /// Bounding-box diagonal of all scene triangles (1 for empty scenes).
    pub fn diagonal(&self) -> f64 {
        self.diagonal
    }

    pub(crate) fn advance(&self, config: &RenderConfig) -> f64 {
        config.advance_eps * self.diagonal
    }

    fn solid(&self, triangle_index: usize) -> SolidTriangle {
        self.solid_triangles[triangle_index]
    }
}

/// Render one image, one camera ray per pixel.
///
/// Pixels are independent and written to fixed offsets, so the result is
/// identical for any worker count. `workers = None` uses the global pool.
pub fn render_image(
    scene: &PreparedScene<'_>,
    camera: &Camera,
    config: &RenderConfig,
    workers: Option<usize>,
) -> Result<Image> {
    config.validate()?;
    let (w, h) = (camera.width, camera.height);
    let render = || {
        let mut pixels = vec![DVec3::ZERO; w as usize * h as usize];
        pixels
            .par_chunks_mut(w as usize)
            .enumerate()
            .for_each(|(y, row)| {
                for (x, px) in row.iter_mut().enumerate() {
                    let ray = camera.ray(x as u32, y as u32);
                    *px = shade_pixel(&ray, scene, config, 0);
                }
            });
        pixels
    };
    let pixels = with_workers(workers, render)?;
    Ok(Image::from_pixels(w, h, pixels))
}

/// Run `f` on a dedicated pool with `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Validation(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
