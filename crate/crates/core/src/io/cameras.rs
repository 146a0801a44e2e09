//! NeRF-style camera sets: a JSON object with `camera_angle_x` and a
//! `frames` array of camera-to-world 4x4 matrices.

use std::path::Path;

use glam::{DMat3, DVec3};
use serde::{Deserialize, Serialize};

use crate::camera::{focal_from_fov, Camera};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct TransformsFile {
    camera_angle_x: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    camera_angle_y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    h: Option<u32>,
    frames: Vec<Frame>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Frame {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    file_path: Option<String>,
    transform_matrix: [[f64; 4]; 4],
}

/// Load cameras, using `default_size` when the file does not record the
/// image size.
pub fn load_cameras(path: impl AsRef<Path>, default_size: (u32, u32)) -> Result<Vec<Camera>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: TransformsFile =
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
    let width = file.w.unwrap_or(default_size.0);
    let height = file.h.unwrap_or(default_size.1);
    if width == 0 || height == 0 {
        return Err(Error::format(path, "image size must be positive"));
    }
    if !(file.camera_angle_x > 0.0 && file.camera_angle_x < std::f64::consts::PI) {
        return Err(Error::format(path, format!("invalid camera_angle_x {}", file.camera_angle_x)));
    }
    let focal_x = focal_from_fov(width, file.camera_angle_x);
    let focal_y = file
        .camera_angle_y
        .map(|a| focal_from_fov(height, a))
        .unwrap_or(focal_x);

    file.frames
        .iter()
        .enumerate()
        .map(|(i, frame)| {
            let m = frame.transform_matrix;
            let rotation = DMat3::from_cols(
                DVec3::new(m[0][0], m[1][0], m[2][0]),
                DVec3::new(m[0][1], m[1][1], m[2][1]),
                DVec3::new(m[0][2], m[1][2], m[2][2]),
            );
            let position = DVec3::new(m[0][3], m[1][3], m[2][3]);
            if !position.is_finite() || rotation.determinant().abs() < 1e-12 {
                return Err(Error::format(path, format!("frame {i}: pose is not invertible")));
            }
            let mut cam = Camera::new(rotation, position, focal_x, focal_y, width, height)
                .map_err(|e| Error::format(path, format!("frame {i}: {e}")))?;
            cam.name = frame.file_path.clone();
            Ok(cam)
        })
        .collect()
}

/// Write cameras in the same layout. All cameras must share the image size
/// and horizontal focal length of the first.
pub fn save_cameras(cameras: &[Camera], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let first = cameras
        .first()
        .ok_or_else(|| Error::Contract("cannot save an empty camera set".into()))?;
    if cameras
        .iter()
        .any(|c| c.width != first.width || c.height != first.height || c.focal_x != first.focal_x)
    {
        return Err(Error::Contract("cameras must share intrinsics".into()));
    }
    let fov = |focal: f64, size: u32| 2.0 * (size as f64 / (2.0 * focal)).atan();
    let file = TransformsFile {
        camera_angle_x: fov(first.focal_x, first.width),
        camera_angle_y: (first.focal_y != first.focal_x).then(|| fov(first.focal_y, first.height)),
        w: Some(first.width),
        h: Some(first.height),
        frames: cameras
            .iter()
            .map(|c| {
                let r = c.rotation;
                let row = |k: usize| [r.x_axis[k], r.y_axis[k], r.z_axis[k], c.position[k]];
                Frame {
                    file_path: c.name.clone(),
                    transform_matrix: [row(0), row(1), row(2), [0.0, 0.0, 0.0, 1.0]],
                }
            })
            .collect(),
    };
    let text = serde_json::to_string_pretty(&file).expect("camera set serializes");
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
