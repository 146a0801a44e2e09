//! Splat PLY files in the common 3D Gaussian splatting layout: log scales,
//! logit opacity, degree-0 SH color and a scalar-first quaternion.

use std::io::Write;
use std::path::Path;

use glam::{DQuat, DVec3};

use super::ply::PlyFile;
use crate::error::{Error, Result};
use crate::splat::{default_eps_flat, flatten, FlatGaussian};

/// Degree-0 spherical harmonic constant.
pub const SH_C0: f64 = 0.282_094_791_773_878_14;

const OPACITY_CLAMP: f64 = 1e-7;

const REQUIRED: [&str; 14] = [
    "x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2", "opacity", "scale_0", "scale_1", "scale_2", "rot_0",
    "rot_1", "rot_2", "rot_3",
];

#[derive(Debug, Clone)]
pub struct LoadedSplats {
    pub splats: Vec<FlatGaussian>,
    /// Records dropped because a field was NaN or infinite.
    pub skipped: usize,
    /// Flat epsilon applied to every splat.
    pub eps_flat: f64,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(OPACITY_CLAMP, 1.0 - OPACITY_CLAMP);
    (p / (1.0 - p)).ln()
}

/// Load with the flat epsilon derived from the scene bounds.
pub fn load_gs_ply(path: impl AsRef<Path>) -> Result<LoadedSplats> {
    load_gs_ply_with(path, None)
}

/// Load, flattening every splat with `eps_flat` when given.
pub fn load_gs_ply_with(path: impl AsRef<Path>, eps_flat: Option<f64>) -> Result<LoadedSplats> {
    let path = path.as_ref();
    let ply = PlyFile::read(path)?;
    let vertex = ply
        .element("vertex")
        .ok_or_else(|| Error::format(path, "missing element 'vertex'"))?;
    let mut columns = [0usize; REQUIRED.len()];
    for (slot, name) in columns.iter_mut().zip(REQUIRED) {
        *slot = vertex
            .property_index(name)
            .ok_or_else(|| Error::format(path, format!("missing property '{name}'")))?;
    }
    if vertex.properties.iter().any(|p| p.name().starts_with("f_rest_")) {
        log::warn!("{}: higher-order SH coefficients are ignored", path.display());
    }

    struct Raw {
        mean: DVec3,
        rotation: DQuat,
        scales: DVec3,
        opacity: f64,
        color: DVec3,
    }
    let mut raw = Vec::with_capacity(vertex.count);
    let mut skipped = 0;
    for (row_idx, row) in vertex.rows.iter().enumerate() {
        let mut v = [0.0; REQUIRED.len()];
        for (k, &col) in columns.iter().enumerate() {
            v[k] = row[col]
                .scalar()
                .ok_or_else(|| Error::format(path, format!("property '{}' is a list", REQUIRED[k])))?;
        }
        if v.iter().any(|x| !x.is_finite()) {
            skipped += 1;
            continue;
        }
        let scales = DVec3::new(v[7].exp(), v[8].exp(), v[9].exp());
        let rotation = DQuat::from_xyzw(v[11], v[12], v[13], v[10]);
        if rotation.length() == 0.0 || !scales.cmpgt(DVec3::ZERO).all() || !scales.is_finite() {
            return Err(Error::format(path, format!("record {row_idx} has a degenerate rotation or scale")));
        }
        raw.push(Raw {
            mean: DVec3::new(v[0], v[1], v[2]),
            rotation: rotation.normalize(),
            scales,
            opacity: sigmoid(v[6]),
            color: (DVec3::new(v[3], v[4], v[5]) * SH_C0 + DVec3::splat(0.5)).clamp(DVec3::ZERO, DVec3::ONE),
        });
    }
    if skipped > 0 {
        log::warn!("{}: skipped {skipped} records with non-finite fields", path.display());
    }

    let eps_flat = match eps_flat {
        Some(e) => e,
        None => {
            let mut lo = DVec3::splat(f64::INFINITY);
            let mut hi = DVec3::splat(f64::NEG_INFINITY);
            for r in &raw {
                let pad = DVec3::splat(r.scales.max_element());
                lo = lo.min(r.mean - pad);
                hi = hi.max(r.mean + pad);
            }
            default_eps_flat(if raw.is_empty() { 0.0 } else { (hi - lo).length() })
        }
    };

    let splats = raw
        .into_iter()
        .map(|r| flatten(r.mean, r.rotation, r.scales, r.opacity, r.color, eps_flat))
        .collect::<Result<Vec<_>>>()?;
    Ok(LoadedSplats {
        splats,
        skipped,
        eps_flat,
    })
}

/// Write splats as binary little-endian float properties.
pub fn save_gs_ply(splats: &[FlatGaussian], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::with_capacity(256 + splats.len() * 17 * 4);
    write!(
        out,
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\n",
        splats.len()
    )
    .expect("writing to a Vec cannot fail");
    for name in [
        "x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2", "opacity", "scale_0", "scale_1",
        "scale_2", "rot_0", "rot_1", "rot_2", "rot_3",
    ] {
        writeln!(out, "property float {name}").expect("writing to a Vec cannot fail");
    }
    out.extend_from_slice(b"end_header\n");
    for g in splats {
        let dc = (g.color - DVec3::splat(0.5)) / SH_C0;
        let ln_s = DVec3::new(g.scales.x.ln(), g.scales.y.ln(), g.scales.z.ln());
        let q = g.rotation;
        let fields = [
            g.mean.x, g.mean.y, g.mean.z, 0.0, 0.0, 0.0, dc.x, dc.y, dc.z, logit(g.opacity), ln_s.x, ln_s.y,
            ln_s.z, q.w, q.x, q.y, q.z,
        ];
        for f in fields {
            out.extend_from_slice(&(f as f32).to_le_bytes());
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FlatGaussian {
        flatten(
            DVec3::new(0.5, -1.0, 2.0),
            DQuat::from_axis_angle(DVec3::new(1.0, 2.0, 3.0).normalize(), 0.7),
            DVec3::new(0.01, 0.3, 0.2),
            0.6,
            DVec3::new(0.1, 0.5, 0.9),
            1e-6,
        )
        .unwrap()
    }

    #[test]
    fn round_trip_within_float_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.ply");
        let g = sample();
        save_gs_ply(&[g], &path).unwrap();
        let back = load_gs_ply_with(&path, Some(1e-6)).unwrap();
        assert_eq!(back.skipped, 0);
        let h = back.splats[0];
        assert!((h.mean - g.mean).abs().max_element() < 1e-6);
        assert!((h.color - g.color).abs().max_element() < 1e-6);
        assert!((h.opacity - g.opacity).abs() < 1e-6);
        assert!(h.rotation.dot(g.rotation).abs() > 1.0 - 1e-6);
    }

    #[test]
    fn saturated_opacity_is_clamped() {
        assert!(logit(1.0).is_finite());
        assert!((sigmoid(logit(1.0)) - 1.0).abs() < 1e-6);
        assert!(sigmoid(logit(0.0)) < 1e-6);
    }

    #[test]
    fn missing_property_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ply");
        std::fs::write(&path, "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nend_header\n0\n").unwrap();
        let err = load_gs_ply(&path).unwrap_err().to_string();
        assert!(err.contains("'y'"), "{err}");
    }

    #[test]
    fn empty_scene_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.ply");
        save_gs_ply(&[], &path).unwrap();
        assert!(load_gs_ply(&path).unwrap().splats.is_empty());
    }
}
