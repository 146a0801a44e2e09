use std::path::Path;

use glam::DVec3;

use crate::error::{Error, Result};

/// Linear RGB image, row-major from the top-left pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: u32,
    height: u32,
    pixels: Vec<DVec3>,
}

pub fn linear_to_srgb(v: f64) -> f64 {
    let v = v.clamp(0.0, 1.0);
    if v <= 0.003_130_8 {
        12.92 * v
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

pub fn srgb_to_linear(v: f64) -> f64 {
    if v <= 0.040_45 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

impl Image {
    pub fn new(width: u32, height: u32) -> Self {
        Self::from_pixels(width, height, vec![DVec3::ZERO; width as usize * height as usize])
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<DVec3>) -> Self {
        assert_eq!(pixels.len(), width as usize * height as usize, "pixel count mismatch");
        Self { width, height, pixels }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[DVec3] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [DVec3] {
        &mut self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> DVec3 {
        self.pixels[(y * self.width + x) as usize]
    }

    /// Interleaved values of one channel (0 = r, 1 = g, 2 = b).
    pub fn channel(&self, c: usize) -> Vec<f64> {
        self.pixels.iter().map(|p| p[c]).collect()
    }

    /// 8-bit sRGB encoding of the linear values.
    pub fn to_srgb8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .flat_map(|p| p.to_array().map(|v| (linear_to_srgb(v) * 255.0).round() as u8))
            .collect()
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let buf = image::RgbImage::from_raw(self.width, self.height, self.to_srgb8())
            .expect("buffer size matches dimensions");
        buf.save_with_format(path, image::ImageFormat::Png).map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::format(path, other.to_string()),
        })
    }

    /// Load a PNG keeping the stored (display-encoded) values scaled to [0, 1].
    pub fn load_png_encoded(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = image::open(path)
            .map_err(|e| match e {
                image::ImageError::IoError(io) => Error::io(path, io),
                other => Error::format(path, other.to_string()),
            })?
            .to_rgb8();
        let (w, h) = img.dimensions();
        let pixels = img
            .pixels()
            .map(|p| DVec3::new(p[0] as f64, p[1] as f64, p[2] as f64) / 255.0)
            .collect();
        Ok(Self::from_pixels(w, h, pixels))
    }

    /// Load a PNG and decode sRGB to linear values.
    pub fn load_png_linear(path: impl AsRef<Path>) -> Result<Self> {
        let mut img = Self::load_png_encoded(path)?;
        for p in &mut img.pixels {
            *p = DVec3::new(srgb_to_linear(p.x), srgb_to_linear(p.y), srgb_to_linear(p.z));
        }
        Ok(img)
    }
}
