//! Pinhole cameras. Local frame follows the OpenGL convention: the camera
//! looks down `-z` with `+y` up and `+x` to the right.

use glam::{DMat3, DVec3};

use crate::accel::Ray;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    /// Camera-to-world rotation.
    pub rotation: DMat3,
    pub position: DVec3,
    pub focal_x: f64,
    pub focal_y: f64,
    pub principal_x: f64,
    pub principal_y: f64,
    pub width: u32,
    pub height: u32,
    pub name: Option<String>,
}

impl Camera {
    /// Principal point at the image center.
    pub fn new(rotation: DMat3, position: DVec3, focal_x: f64, focal_y: f64, width: u32, height: u32) -> Result<Self> {
        let cam = Self {
            rotation,
            position,
            focal_x,
            focal_y,
            principal_x: width as f64 / 2.0,
            principal_y: height as f64 / 2.0,
            width,
            height,
            name: None,
        };
        cam.validate()?;
        Ok(cam)
    }

    /// Camera at `eye` looking at `target` with horizontal field of view
    /// `fov_x` (radians) and square pixels.
    pub fn look_at(eye: DVec3, target: DVec3, up: DVec3, fov_x: f64, width: u32, height: u32) -> Result<Self> {
        let forward = (target - eye).normalize();
        let right = forward.cross(up).normalize();
        if !right.is_finite() {
            return Err(Error::Validation("look_at: up is parallel to the view direction".into()));
        }
        let true_up = right.cross(forward);
        let rotation = DMat3::from_cols(right, true_up, -forward);
        let focal = focal_from_fov(width, fov_x);
        Self::new(rotation, eye, focal, focal, width, height)
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.rotation;
        let err = (r.transpose() * r - DMat3::IDENTITY).to_cols_array().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if err > 1e-6 || r.determinant() < 0.0 {
            return Err(Error::Validation(format!("camera rotation is not a rotation (error {err})")));
        }
        if !(self.focal_x > 0.0 && self.focal_y > 0.0) {
            return Err(Error::Validation("camera focal lengths must be positive".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::Validation("camera resolution must be non-zero".into()));
        }
        Ok(())
    }

    pub fn forward(&self) -> DVec3 {
        -self.rotation.z_axis
    }

    /// Ray through the center of pixel `(x, y)`; `y` grows downward.
    pub fn ray(&self, x: u32, y: u32) -> Ray {
        let local = DVec3::new(
            (x as f64 + 0.5 - self.principal_x) / self.focal_x,
            -(y as f64 + 0.5 - self.principal_y) / self.focal_y,
            -1.0,
        );
        Ray::new(self.position, self.rotation * local)
    }
}

pub fn focal_from_fov(width: u32, fov: f64) -> f64 {
    width as f64 / (2.0 * (fov / 2.0).tan())
}

pub fn camera_ray(camera: &Camera, x: u32, y: u32) -> Ray {
    camera.ray(x, y)
}
