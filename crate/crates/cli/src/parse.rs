//! Value parsers for compound flags.

use std::path::PathBuf;

use glam::DVec3;

use octasplat::{Material, PointLight};

pub fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("'{p}' is not a number")))
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        [a, b, c] if parts.iter().all(|v| v.is_finite()) => Ok([*a, *b, *c]),
        _ => Err(format!("expected three comma-separated numbers, got '{s}'")),
    }
}

/// `--mesh path:material[:ior]` with material `diffuse`, `mirror` or `glass`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshArg {
    pub path: PathBuf,
    pub material: Material,
}

const DIFFUSE_ALBEDO: f64 = 0.8;
const DEFAULT_IOR: f64 = 1.5;

pub fn parse_mesh(s: &str) -> Result<MeshArg, String> {
    let parts: Vec<&str> = s.rsplitn(3, ':').collect();
    let (path, kind, ior) = match parts.as_slice() {
        [ior, kind, path] if ior.parse::<f64>().is_ok() => (*path, *kind, Some(*ior)),
        [kind, rest @ ..] if !rest.is_empty() => {
            let path = rest.iter().rev().copied().collect::<Vec<_>>().join(":");
            return build_mesh(&path, kind, None);
        }
        _ => return Err(format!("expected path:material[:ior], got '{s}'")),
    };
    build_mesh(path, kind, ior)
}

fn build_mesh(path: &str, kind: &str, ior: Option<&str>) -> Result<MeshArg, String> {
    if path.is_empty() {
        return Err("mesh path is empty".into());
    }
    let material = match (kind, ior) {
        ("diffuse", None) => Material::diffuse(DVec3::splat(DIFFUSE_ALBEDO)),
        ("mirror", None) => Material::mirror(DVec3::ONE),
        ("glass", ior) => {
            let ior = match ior {
                Some(v) => v.parse::<f64>().map_err(|_| format!("invalid ior '{v}'"))?,
                None => DEFAULT_IOR,
            };
            Material::glass(DVec3::ONE, ior)
        }
        ("diffuse" | "mirror", Some(_)) => return Err(format!("only glass takes an ior, got '{kind}'")),
        _ => return Err(format!("unknown material '{kind}' (diffuse, mirror or glass)")),
    };
    material.validate().map_err(|e| e.to_string())?;
    Ok(MeshArg {
        path: PathBuf::from(path),
        material,
    })
}

/// `--light x,y,z[:r,g,b]`; intensity defaults to white.
pub fn parse_light(s: &str) -> Result<PointLight, String> {
    let (pos, intensity) = match s.split_once(':') {
        Some((p, i)) => (p, parse_triple(i)?),
        None => (s, [1.0; 3]),
    };
    let light = PointLight {
        position: DVec3::from_array(parse_triple(pos)?),
        intensity: DVec3::from_array(intensity),
    };
    light.validate().map_err(|e| e.to_string())?;
    Ok(light)
}

#[cfg(test)]
mod tests {
    use super::*;
    use octasplat::MaterialKind;

    #[test]
    fn mesh_specs() {
        let m = parse_mesh("scene/box.obj:glass:1.33").unwrap();
        assert_eq!(m.path, PathBuf::from("scene/box.obj"));
        assert_eq!(m.material.kind, MaterialKind::Glass);
        assert_eq!(m.material.ior, 1.33);
        let m = parse_mesh("C:/data/floor.obj:mirror").unwrap();
        assert_eq!(m.path, PathBuf::from("C:/data/floor.obj"));
        assert_eq!(m.material.kind, MaterialKind::Mirror);
        assert_eq!(parse_mesh("floor.obj:glass").unwrap().material.ior, DEFAULT_IOR);
        assert!(parse_mesh("floor.obj:wood").is_err());
        assert!(parse_mesh("floor.obj").is_err());
        assert!(parse_mesh("floor.obj:mirror:1.5").is_err());
        assert!(parse_mesh("floor.obj:glass:0.5").is_err());
    }

    #[test]
    fn lights_and_triples() {
        let l = parse_light("0,2,0:0.5,0.5,1").unwrap();
        assert_eq!(l.position, DVec3::new(0.0, 2.0, 0.0));
        assert_eq!(l.intensity, DVec3::new(0.5, 0.5, 1.0));
        assert_eq!(parse_light("1,1,1").unwrap().intensity, DVec3::ONE);
        assert!(parse_triple("1,2").is_err());
        assert!(parse_triple("1,x,2").is_err());
    }
}
