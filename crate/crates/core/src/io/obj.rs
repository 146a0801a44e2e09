//! Wavefront OBJ reader for solid meshes. Only `v` and `f` records are
//! used; polygons are fan-triangulated.

use std::path::Path;

use glam::DVec3;

use crate::error::{Error, Result};
use crate::scene::{Material, SolidMesh};

#[derive(Debug, Clone)]
pub struct LoadedMesh {
    pub mesh: SolidMesh,
    /// Zero-area triangles removed during loading.
    pub dropped_faces: usize,
}

pub fn load_solid_mesh(path: impl AsRef<Path>, material: Material) -> Result<LoadedMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let loaded = parse_obj(&text, material).map_err(|msg| Error::format(path, msg))?;
    if loaded.dropped_faces > 0 {
        log::warn!("{}: dropped {} degenerate faces", path.display(), loaded.dropped_faces);
    }
    Ok(loaded)
}

fn resolve_index(token: &str, vertex_count: usize) -> std::result::Result<usize, String> {
    let head = token.split('/').next().unwrap_or("");
    let raw: i64 = head.parse().map_err(|_| format!("invalid face index '{token}'"))?;
    let idx = match raw {
        r if r > 0 => r - 1,
        r if r < 0 => vertex_count as i64 + r,
        _ => return Err("face index 0 is invalid".into()),
    };
    if idx < 0 || idx as usize >= vertex_count {
        return Err(format!("face index '{token}' out of range"));
    }
    Ok(idx as usize)
}

pub fn parse_obj(text: &str, material: Material) -> std::result::Result<LoadedMesh, String> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut dropped = 0;
    for (line_no, line) in text.lines().enumerate() {
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let xyz: Vec<f64> = tokens
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| format!("line {}: invalid vertex", line_no + 1))?;
                if xyz.len() != 3 {
                    return Err(format!("line {}: vertex needs three coordinates", line_no + 1));
                }
                vertices.push(DVec3::new(xyz[0], xyz[1], xyz[2]));
            }
            Some("f") => {
                let idx = tokens
                    .map(|t| resolve_index(t, vertices.len()))
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| format!("line {}: {e}", line_no + 1))?;
                if idx.len() < 3 {
                    return Err(format!("line {}: face needs three vertices", line_no + 1));
                }
                for k in 1..idx.len() - 1 {
                    let tri = [idx[0], idx[k], idx[k + 1]];
                    let [a, b, c] = tri.map(|i| vertices[i]);
                    if (b - a).cross(c - a).length() <= 0.0 {
                        dropped += 1;
                    } else {
                        triangles.push(tri);
                    }
                }
            }
            _ => {}
        }
    }
    let mesh = SolidMesh::new(vertices, triangles, material).map_err(|e| e.to_string())?;
    Ok(LoadedMesh {
        mesh,
        dropped_faces: dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quads_slashes_and_negative_indices() {
        let src = "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\nf -4 -3 -2\n";
        let m = parse_obj(src, Material::diffuse(DVec3::ONE)).unwrap();
        assert_eq!(m.mesh.triangles, vec![[0, 1, 2], [0, 2, 3], [0, 1, 2]]);
        assert_eq!(m.dropped_faces, 0);
    }

    #[test]
    fn degenerate_faces_dropped() {
        let src = "v 0 0 0\nv 1 0 0\nv 2 0 0\nv 0 1 0\nf 1 2 3\nf 1 2 4\n";
        let m = parse_obj(src, Material::diffuse(DVec3::ONE)).unwrap();
        assert_eq!(m.dropped_faces, 1);
        assert_eq!(m.mesh.triangles.len(), 1);
    }

    #[test]
    fn out_of_range_index_is_error() {
        let src = "v 0 0 0\nf 1 2 3\n";
        assert!(parse_obj(src, Material::diffuse(DVec3::ONE)).is_err());
    }
}
