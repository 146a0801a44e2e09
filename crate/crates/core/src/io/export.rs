//! Polygon-mesh export so splat proxies can be edited or rendered in
//! external tools.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use glam::DVec3;

use super::ply::PlyFile;
use crate::error::{Error, Result};
use crate::mesh::{polygon_vertices, SplatMesh, FAN_INDICES, FAN_TRIANGLES, POLYGON_SIDES};
use crate::splat::{ConfidenceLevel, FlatGaussian};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExportStats {
    pub vertices: usize,
    pub triangles: usize,
}

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Write `8N` vertices and `6N` fan triangles. Per-vertex color carries the
/// splat color and opacity.
pub fn export_splat_mesh(
    splats: &[FlatGaussian],
    level: &ConfidenceLevel,
    path: impl AsRef<Path>,
    format: MeshFormat,
) -> Result<ExportStats> {
    let path = path.as_ref();
    match format {
        MeshFormat::Ply => write_ply(splats, level, path)?,
        MeshFormat::Obj => write_obj(splats, level, path)?,
    }
    Ok(ExportStats {
        vertices: splats.len() * POLYGON_SIDES,
        triangles: splats.len() * FAN_TRIANGLES,
    })
}

fn write_ply(splats: &[FlatGaussian], level: &ConfidenceLevel, path: &Path) -> Result<()> {
    let n = splats.len();
    let mut out = Vec::with_capacity(256 + n * (POLYGON_SIDES * 16 + FAN_TRIANGLES * 13));
    write!(
        out,
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\nproperty uchar alpha\n\
         element face {}\nproperty list uchar int vertex_indices\nend_header\n",
        n * POLYGON_SIDES,
        n * FAN_TRIANGLES
    )
    .expect("writing to a Vec cannot fail");
    for g in splats {
        let rgba = [to_u8(g.color.x), to_u8(g.color.y), to_u8(g.color.z), to_u8(g.opacity)];
        for p in polygon_vertices(g, level) {
            for c in [p.x, p.y, p.z] {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
            out.extend_from_slice(&rgba);
        }
    }
    for k in 0..n {
        let base = (k * POLYGON_SIDES) as i32;
        for tri in FAN_INDICES {
            out.push(3);
            for i in tri {
                out.extend_from_slice(&(base + i as i32).to_le_bytes());
            }
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn write_obj(splats: &[FlatGaussian], level: &ConfidenceLevel, path: &Path) -> Result<()> {
    let mtl_path = path.with_extension("mtl");
    let mtl_name = mtl_path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "splats.mtl".into());
    let mut obj = String::new();
    let mut mtl = String::new();
    writeln!(obj, "mtllib {mtl_name}").unwrap();
    for g in splats {
        let c = g.color;
        for p in polygon_vertices(g, level) {
            writeln!(obj, "v {} {} {} {} {} {}", p.x, p.y, p.z, c.x, c.y, c.z).unwrap();
        }
    }
    for (k, g) in splats.iter().enumerate() {
        writeln!(obj, "usemtl splat_{k}").unwrap();
        let base = k * POLYGON_SIDES + 1;
        for tri in FAN_INDICES {
            writeln!(obj, "f {} {} {}", base + tri[0], base + tri[1], base + tri[2]).unwrap();
        }
        writeln!(mtl, "newmtl splat_{k}").unwrap();
        writeln!(mtl, "Kd {} {} {}", g.color.x, g.color.y, g.color.z).unwrap();
        writeln!(mtl, "d {}", g.opacity).unwrap();
    }
    std::fs::write(path, obj).map_err(|e| Error::io(path, e))?;
    std::fs::write(&mtl_path, mtl).map_err(|e| Error::io(&mtl_path, e))
}

/// Re-import an exported mesh as per-splat polygons. Vertices are grouped
/// eight at a time in file order.
pub fn read_exported_polygons(path: impl AsRef<Path>) -> Result<Vec<SplatMesh>> {
    let path = path.as_ref();
    let is_ply = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("ply"));
    let points = if is_ply {
        let ply = PlyFile::read(path)?;
        let vertex = ply
            .element("vertex")
            .ok_or_else(|| Error::format(path, "missing element 'vertex'"))?;
        let cols = ["x", "y", "z"].map(|n| vertex.property_index(n));
        let [Some(x), Some(y), Some(z)] = cols else {
            return Err(Error::format(path, "vertex element lacks x, y or z"));
        };
        vertex
            .rows
            .iter()
            .map(|r| {
                let get = |i: usize| r[i].scalar().unwrap_or(f64::NAN);
                DVec3::new(get(x), get(y), get(z))
            })
            .collect::<Vec<_>>()
    } else {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut pts = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let mut it = line.split_whitespace();
            if it.next() != Some("v") {
                continue;
            }
            let xyz: Vec<f64> = it.take(3).filter_map(|t| t.parse().ok()).collect();
            if xyz.len() != 3 {
                return Err(Error::format(path, format!("line {}: malformed vertex", line_no + 1)));
            }
            pts.push(DVec3::new(xyz[0], xyz[1], xyz[2]));
        }
        pts
    };
    if points.len() % POLYGON_SIDES != 0 {
        return Err(Error::format(
            path,
            format!("{} vertices is not a multiple of {POLYGON_SIDES}", points.len()),
        ));
    }
    Ok(points
        .chunks_exact(POLYGON_SIDES)
        .enumerate()
        .map(|(splat_index, c)| SplatMesh {
            splat_index,
            vertices: std::array::from_fn(|i| c[i]),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::gaussian_to_polygon;
    use crate::splat::flatten;
    use glam::DQuat;

    fn splats() -> Vec<FlatGaussian> {
        (0..3)
            .map(|k| {
                flatten(
                    DVec3::new(k as f64, 0.5, -1.0),
                    DQuat::from_rotation_y(0.3 * k as f64),
                    DVec3::new(1e-3, 0.2, 0.1 + 0.05 * k as f64),
                    0.8,
                    DVec3::new(0.2, 0.4, 0.6),
                    1e-6,
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn obj_export_reimports_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.obj");
        let level = ConfidenceLevel::default();
        let s = splats();
        let stats = export_splat_mesh(&s, &level, &path, MeshFormat::Obj).unwrap();
        assert_eq!(stats, ExportStats { vertices: 24, triangles: 18 });
        let mtl = std::fs::read_to_string(path.with_extension("mtl")).unwrap();
        assert_eq!(mtl.matches("newmtl").count(), 3);
        let polys = read_exported_polygons(&path).unwrap();
        for (k, p) in polys.iter().enumerate() {
            assert_eq!(p, &gaussian_to_polygon(k, &s[k], &level));
        }
    }

    #[test]
    fn ply_export_counts_and_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ply");
        let level = ConfidenceLevel::default();
        let s = splats();
        export_splat_mesh(&s, &level, &path, MeshFormat::Ply).unwrap();
        let ply = PlyFile::read(&path).unwrap();
        assert_eq!(ply.element("face").unwrap().count, 18);
        let polys = read_exported_polygons(&path).unwrap();
        let expected = gaussian_to_polygon(2, &s[2], &level);
        for (a, b) in polys[2].vertices.iter().zip(expected.vertices) {
            assert!((*a - b).length() < 1e-6);
        }
    }
}
