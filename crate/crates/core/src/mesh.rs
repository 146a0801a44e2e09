//! Octagon proxies of flat Gaussians and the inverse reconstruction used
//! for mesh-driven editing.

use std::f64::consts::TAU;

use glam::{DQuat, DVec3};

use crate::error::{Error, Result};
use crate::splat::{quat_from_in_plane_axes, ConfidenceLevel, FlatGaussian};

pub const POLYGON_SIDES: usize = 8;
pub const FAN_TRIANGLES: usize = POLYGON_SIDES - 2;

/// Triangle-fan triangulation of the octagon, shared by every splat.
pub const FAN_INDICES: [[usize; 3]; FAN_TRIANGLES] = [
    [0, 1, 2],
    [0, 2, 3],
    [0, 3, 4],
    [0, 4, 5],
    [0, 5, 6],
    [0, 6, 7],
];

const DEGENERATE_LENGTH: f64 = 1e-12;

/// Editable 8-vertex polygon standing in for one splat.
#[derive(Debug, Clone, PartialEq)]
pub struct SplatMesh {
    pub splat_index: usize,
    pub vertices: [DVec3; POLYGON_SIDES],
}

impl SplatMesh {
    pub fn triangles(&self) -> impl Iterator<Item = [DVec3; 3]> + '_ {
        FAN_INDICES
            .iter()
            .map(|t| [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]])
    }

    pub fn transformed(&self, f: impl Fn(DVec3) -> DVec3) -> Self {
        Self {
            splat_index: self.splat_index,
            vertices: self.vertices.map(f),
        }
    }
}

fn vertex_angle(i: usize) -> f64 {
    TAU * i as f64 / POLYGON_SIDES as f64
}

/// World-space polygon vertices `P_i = R S (0, sqrt(Q) cos, sqrt(Q) sin) + m`.
pub fn polygon_vertices(g: &FlatGaussian, level: &ConfidenceLevel) -> [DVec3; POLYGON_SIDES] {
    let [_, r2, r3] = g.axes();
    let radius = level.radius();
    let a2 = r2 * (g.scales.y * radius);
    let a3 = r3 * (g.scales.z * radius);
    std::array::from_fn(|i| {
        let (sin, cos) = vertex_angle(i).sin_cos();
        g.mean + a2 * cos + a3 * sin
    })
}

pub fn gaussian_to_polygon(
    splat_index: usize,
    g: &FlatGaussian,
    level: &ConfidenceLevel,
) -> SplatMesh {
    SplatMesh {
        splat_index,
        vertices: polygon_vertices(g, level),
    }
}

/// Geometry recovered from a polygon: everything except opacity and color.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplatGeometry {
    pub mean: DVec3,
    pub rotation: DQuat,
    pub scales: DVec3,
}

impl SplatGeometry {
    pub fn apply_to(&self, g: &FlatGaussian) -> FlatGaussian {
        FlatGaussian {
            mean: self.mean,
            rotation: self.rotation,
            scales: self.scales,
            ..*g
        }
    }
}

/// The two vertices a reconstruction reads its frame from.
///
/// `axis` must lie on the `r2` axis of the unedited polygon (cosine of its
/// angle is +-1) and `plane` must not (non-zero sine).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnchorPair {
    pub axis: usize,
    pub plane: usize,
}

impl Default for AnchorPair {
    fn default() -> Self {
        Self { axis: 0, plane: 2 }
    }
}

impl AnchorPair {
    pub fn new(axis: usize, plane: usize) -> Result<Self> {
        let valid_axis = axis == 0 || axis == POLYGON_SIDES / 2;
        let valid_plane = plane < POLYGON_SIDES && !plane.is_multiple_of(POLYGON_SIDES / 2);
        if !valid_axis || !valid_plane {
            return Err(Error::Validation(format!(
                "anchor vertices ({axis}, {plane}) do not determine the frame"
            )));
        }
        Ok(Self { axis, plane })
    }
}

/// Rebuild the flat Gaussian geometry from an (edited) polygon using the
/// default anchors `{0, 2}`.
pub fn polygon_to_gaussian(
    mesh: &SplatMesh,
    level: &ConfidenceLevel,
    eps_flat: f64,
) -> Result<SplatGeometry> {
    polygon_to_gaussian_with(mesh, level, eps_flat, AnchorPair::default())
}

pub fn polygon_to_gaussian_with(
    mesh: &SplatMesh,
    level: &ConfidenceLevel,
    eps_flat: f64,
    anchors: AnchorPair,
) -> Result<SplatGeometry> {
    let degenerate = |reason: &str| Error::DegenerateEdit {
        splat: mesh.splat_index,
        reason: reason.to_string(),
    };
    let p = &mesh.vertices;
    let radius = level.radius();
    if radius <= 0.0 {
        return Err(Error::Validation(
            "confidence level must have a positive quantile".into(),
        ));
    }

    let center = 0.5 * (p[POLYGON_SIDES / 4] + p[3 * POLYGON_SIDES / 4]);

    let axis_offset = p[anchors.axis] - center;
    let axis_len = axis_offset.length();
    if !(axis_len >= DEGENERATE_LENGTH) {
        return Err(degenerate("axis vertex coincides with the center"));
    }
    let mut r2 = axis_offset / axis_len;
    let mut s2 = axis_len / (radius * vertex_angle(anchors.axis).cos());
    if s2 < 0.0 {
        r2 = -r2;
        s2 = -s2;
    }

    let plane_offset = p[anchors.plane] - center;
    let orth = plane_offset - plane_offset.dot(r2) * r2;
    let orth_len = orth.length();
    if !(orth_len >= DEGENERATE_LENGTH) {
        return Err(degenerate("plane vertex is collinear with the axis vertex"));
    }
    let mut r3 = orth / orth_len;
    let mut s3 = plane_offset.dot(r3) / (radius * vertex_angle(anchors.plane).sin());
    if s3 < 0.0 {
        r3 = -r3;
        s3 = -s3;
    }

    Ok(SplatGeometry {
        mean: center,
        rotation: quat_from_in_plane_axes(r2, r3),
        scales: DVec3::new(eps_flat, s2, s3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn identity_splat(scales: DVec3) -> FlatGaussian {
        FlatGaussian {
            mean: DVec3::ZERO,
            rotation: DQuat::IDENTITY,
            scales,
            opacity: 1.0,
            color: DVec3::ONE,
        }
    }

    fn level_with_q(q: f64) -> ConfidenceLevel {
        // Solve alpha for a target quantile through the CDF.
        let alpha = crate::chi2::chi_squared_cdf(q, 3.0);
        let level = ConfidenceLevel::new(alpha).unwrap();
        assert!((level.q() - q).abs() < 1e-9);
        level
    }

    #[test]
    fn unit_polygon_cardinal_vertices() {
        let level = level_with_q(1.0);
        let g = identity_splat(DVec3::new(1e-6, 1.0, 1.0));
        let p = polygon_vertices(&g, &level);
        let tol = 1e-9;
        assert!((p[0] - DVec3::new(0.0, 1.0, 0.0)).length() < tol);
        assert!((p[2] - DVec3::new(0.0, 0.0, 1.0)).length() < tol);
        assert!((p[4] - DVec3::new(0.0, -1.0, 0.0)).length() < tol);
        assert!((p[6] - DVec3::new(0.0, 0.0, -1.0)).length() < tol);
        assert!((p[1] - DVec3::new(0.0, SQRT_2 / 2.0, SQRT_2 / 2.0)).length() < tol);
    }

    #[test]
    fn rotated_translated_polygon_first_vertex() {
        let level = level_with_q(4.0);
        let g = FlatGaussian {
            mean: DVec3::new(1.0, 2.0, 3.0),
            rotation: DQuat::from_rotation_x(FRAC_PI_2),
            scales: DVec3::new(1e-6, 2.0, 3.0),
            opacity: 1.0,
            color: DVec3::ONE,
        };
        let p = polygon_vertices(&g, &level);
        // Rotating about x by a quarter turn maps the y axis onto z.
        let expected = DVec3::new(1.0, 2.0, 3.0) + 2.0 * 2.0 * DVec3::Z;
        assert!((p[0] - expected).length() < 1e-8, "{:?}", p[0]);
    }

    #[test]
    fn fan_covers_all_vertices_once_as_hub_or_rim() {
        let mut seen = [0usize; POLYGON_SIDES];
        for tri in FAN_INDICES {
            for v in tri {
                seen[v] += 1;
            }
        }
        assert_eq!(seen[0], FAN_TRIANGLES);
        assert!(seen[1..].iter().all(|&c| c >= 1));
    }

    #[test]
    fn unedited_round_trip() {
        let level = ConfidenceLevel::default();
        let g = FlatGaussian {
            mean: DVec3::new(-0.3, 0.7, 2.0),
            rotation: DQuat::from_euler(glam::EulerRot::XYZ, 0.3, -1.1, 2.0),
            scales: DVec3::new(1e-6, 0.4, 0.15),
            opacity: 0.3,
            color: DVec3::new(0.1, 0.2, 0.3),
        };
        let mesh = gaussian_to_polygon(3, &g, &level);
        let geo = polygon_to_gaussian(&mesh, &level, 1e-6).unwrap();
        assert!((geo.mean - g.mean).length() < 1e-12);
        assert!((geo.scales - g.scales).length() < 1e-12);
        let [_, r2, r3] = g.axes();
        let back = geo.apply_to(&g);
        assert!((back.axes()[1] - r2).length() < 1e-12);
        assert!((back.axes()[2] - r3).length() < 1e-12);
    }

    #[test]
    fn alternative_anchors_agree_with_default() {
        let level = ConfidenceLevel::default();
        let g = FlatGaussian {
            mean: DVec3::new(0.5, 0.0, -1.0),
            rotation: DQuat::from_euler(glam::EulerRot::ZYX, 0.9, 0.2, -0.4),
            scales: DVec3::new(1e-6, 0.8, 0.25),
            opacity: 0.3,
            color: DVec3::ONE,
        };
        let mesh = gaussian_to_polygon(0, &g, &level);
        let reference = polygon_to_gaussian(&mesh, &level, 1e-6).unwrap();
        for (axis, plane) in [(4, 2), (0, 1), (4, 7), (0, 5)] {
            let anchors = AnchorPair::new(axis, plane).unwrap();
            let geo = polygon_to_gaussian_with(&mesh, &level, 1e-6, anchors).unwrap();
            assert!((geo.mean - reference.mean).length() < 1e-12);
            assert!((geo.scales - reference.scales).length() < 1e-12, "{axis},{plane}");
            let a = DMatAxes::from(geo.rotation);
            let b = DMatAxes::from(reference.rotation);
            assert!((a.0[1] - b.0[1]).length() < 1e-12);
            assert!((a.0[2] - b.0[2]).length() < 1e-12);
        }
    }

    struct DMatAxes([DVec3; 3]);

    impl From<DQuat> for DMatAxes {
        fn from(q: DQuat) -> Self {
            let m = glam::DMat3::from_quat(q);
            DMatAxes([m.x_axis, m.y_axis, m.z_axis])
        }
    }

    #[test]
    fn anchor_validation() {
        assert!(AnchorPair::new(1, 2).is_err());
        assert!(AnchorPair::new(0, 4).is_err());
        assert!(AnchorPair::new(0, 8).is_err());
        assert!(AnchorPair::new(4, 6).is_ok());
    }

    #[test]
    fn collapsed_polygon_reports_splat_index() {
        let level = ConfidenceLevel::default();
        let mesh = SplatMesh {
            splat_index: 17,
            vertices: [DVec3::ONE; POLYGON_SIDES],
        };
        match polygon_to_gaussian(&mesh, &level, 1e-6) {
            Err(Error::DegenerateEdit { splat, .. }) => assert_eq!(splat, 17),
            other => panic!("expected degenerate edit, got {other:?}"),
        }
    }

    #[test]
    fn squashed_polygon_is_degenerate() {
        let level = ConfidenceLevel::default();
        let g = identity_splat(DVec3::new(1e-6, 1.0, 1.0));
        // Project every vertex onto the r2 axis.
        let mesh = gaussian_to_polygon(2, &g, &level).transformed(|v| DVec3::new(0.0, v.y, 0.0));
        assert!(matches!(
            polygon_to_gaussian(&mesh, &level, 1e-6),
            Err(Error::DegenerateEdit { splat: 2, .. })
        ));
    }
}
