//! Scene containers: splats plus optional solid meshes and point lights.

use glam::{DAffine3, DVec3};

use crate::error::{Error, Result};
use crate::splat::FlatGaussian;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaterialKind {
    Diffuse,
    Mirror,
    Glass,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub kind: MaterialKind,
    pub albedo: DVec3,
    /// Index of refraction; only read for glass.
    pub ior: f64,
}

impl Material {
    pub fn diffuse(albedo: DVec3) -> Self {
        Self {
            kind: MaterialKind::Diffuse,
            albedo,
            ior: 1.0,
        }
    }

    pub fn mirror(albedo: DVec3) -> Self {
        Self {
            kind: MaterialKind::Mirror,
            albedo,
            ior: 1.0,
        }
    }

    pub fn glass(albedo: DVec3, ior: f64) -> Self {
        Self {
            kind: MaterialKind::Glass,
            albedo,
            ior,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.albedo.cmpge(DVec3::ZERO).all() && self.albedo.cmple(DVec3::ONE).all()) {
            return Err(Error::Validation(format!("albedo {:?} outside [0, 1]^3", self.albedo)));
        }
        // ior == 1 is allowed: an index-matched glass is a useful no-op.
        if self.kind == MaterialKind::Glass && !(self.ior >= 1.0 && self.ior.is_finite()) {
            return Err(Error::Validation(format!("glass ior must be >= 1, got {}", self.ior)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointLight {
    pub position: DVec3,
    pub intensity: DVec3,
}

impl PointLight {
    pub fn validate(&self) -> Result<()> {
        if !self.intensity.cmpge(DVec3::ZERO).all() {
            return Err(Error::Validation(format!(
                "light intensity {:?} must be non-negative",
                self.intensity
            )));
        }
        Ok(())
    }
}

/// Opaque (or reflective/refractive) triangle mesh placed in the scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SolidMesh {
    pub vertices: Vec<DVec3>,
    pub triangles: Vec<[usize; 3]>,
    pub material: Material,
    pub transform: Option<DAffine3>,
}

impl SolidMesh {
    pub fn new(vertices: Vec<DVec3>, triangles: Vec<[usize; 3]>, material: Material) -> Result<Self> {
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i >= vertices.len())) {
            return Err(Error::Validation(format!(
                "triangle {t:?} references a vertex beyond {}",
                vertices.len()
            )));
        }
        material.validate()?;
        Ok(Self {
            vertices,
            triangles,
            material,
            transform: None,
        })
    }

    pub fn with_transform(mut self, transform: DAffine3) -> Self {
        self.transform = Some(transform);
        self
    }

    pub fn world_triangles(&self) -> impl Iterator<Item = [DVec3; 3]> + '_ {
        let xf = self.transform.unwrap_or(DAffine3::IDENTITY);
        self.triangles
            .iter()
            .map(move |t| t.map(|i| xf.transform_point3(self.vertices[i])))
    }

    /// Axis-aligned box from `min` to `max` with outward-wound faces.
    pub fn cuboid(min: DVec3, max: DVec3, material: Material) -> Result<Self> {
        let v = (0..8)
            .map(|i| {
                DVec3::new(
                    if i & 1 == 0 { min.x } else { max.x },
                    if i & 2 == 0 { min.y } else { max.y },
                    if i & 4 == 0 { min.z } else { max.z },
                )
            })
            .collect();
        let quads = [
            [0, 2, 3, 1], // -z
            [4, 5, 7, 6], // +z
            [0, 1, 5, 4], // -y
            [2, 6, 7, 3], // +y
            [0, 4, 6, 2], // -x
            [1, 3, 7, 5], // +x
        ];
        let tris = quads
            .iter()
            .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
            .collect();
        Self::new(v, tris, material)
    }

    /// Square of side `2 * half` centered at `center` with the given normal.
    pub fn quad(center: DVec3, normal: DVec3, half: f64, material: Material) -> Result<Self> {
        let n = normal.normalize();
        let (u, w) = n.any_orthonormal_pair();
        let v = vec![
            center + half * (-u - w),
            center + half * (u - w),
            center + half * (u + w),
            center + half * (-u + w),
        ];
        // Wind so the face normal matches `normal`.
        let tris = if (v[1] - v[0]).cross(v[2] - v[0]).dot(n) > 0.0 {
            vec![[0, 1, 2], [0, 2, 3]]
        } else {
            vec![[0, 2, 1], [0, 3, 2]]
        };
        Self::new(v, tris, material)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scene {
    pub splats: Vec<FlatGaussian>,
    pub solids: Vec<SolidMesh>,
    pub lights: Vec<PointLight>,
}

impl Scene {
    pub fn from_splats(splats: Vec<FlatGaussian>) -> Self {
        Self {
            splats,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.splats.iter().enumerate() {
            g.validate()
                .map_err(|e| Error::Validation(format!("splat {i}: {e}")))?;
        }
        for s in &self.solids {
            s.material.validate()?;
        }
        for l in &self.lights {
            l.validate()?;
        }
        Ok(())
    }
}
