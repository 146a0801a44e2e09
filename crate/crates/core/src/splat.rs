//! Flat Gaussian primitives and the confidence level that sizes their
//! polygon proxies.

use glam::{DMat3, DQuat, DVec3};

use crate::chi2::chi2_quantile;
use crate::error::{Error, Result};

/// Default flat-axis scale relative to the scene bounding-box diagonal.
pub const EPS_FLAT_RELATIVE: f64 = 1e-6;

const UNIT_TOLERANCE: f64 = 1e-9;

/// One flat Gaussian splat.
///
/// The rotation frame columns are `r1, r2, r3`; `r1` is the flat axis whose
/// scale `scales.x` is pinned to the flat epsilon. The quaternion is stored
/// as a `glam::DQuat` and exchanged scalar-first `(w, x, y, z)` at the file
/// boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatGaussian {
    pub mean: DVec3,
    pub rotation: DQuat,
    pub scales: DVec3,
    pub opacity: f64,
    pub color: DVec3,
}

impl FlatGaussian {
    pub fn frame(&self) -> DMat3 {
        DMat3::from_quat(self.rotation)
    }

    /// Frame columns `[r1, r2, r3]`.
    pub fn axes(&self) -> [DVec3; 3] {
        let m = self.frame();
        [m.x_axis, m.y_axis, m.z_axis]
    }

    pub fn eps_flat(&self) -> f64 {
        self.scales.x
    }

    pub fn covariance(&self) -> DMat3 {
        covariance(self)
    }

    pub fn validate(&self) -> Result<()> {
        let q_norm = self.rotation.length();
        if (q_norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::Validation(format!(
                "rotation quaternion has norm {q_norm}"
            )));
        }
        if !(self.scales.cmpgt(DVec3::ZERO).all() && self.scales.is_finite()) {
            return Err(Error::Validation(format!(
                "scales must be positive and finite, got {:?}",
                self.scales
            )));
        }
        if !(0.0..=1.0).contains(&self.opacity) {
            return Err(Error::Validation(format!(
                "opacity {} outside [0, 1]",
                self.opacity
            )));
        }
        if !(self.color.cmpge(DVec3::ZERO).all() && self.color.cmple(DVec3::ONE).all()) {
            return Err(Error::Validation(format!(
                "color {:?} outside [0, 1]^3",
                self.color
            )));
        }
        if !self.mean.is_finite() {
            return Err(Error::Validation("mean is not finite".into()));
        }
        Ok(())
    }
}

/// Confidence level `alpha` with its chi-square(3) quantile `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceLevel {
    alpha: f64,
    q: f64,
}

impl ConfidenceLevel {
    pub fn new(alpha: f64) -> Result<Self> {
        Ok(Self {
            alpha,
            q: chi2_quantile(alpha)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Polygon radius in units of the in-plane scales.
    pub fn radius(&self) -> f64 {
        self.q.sqrt()
    }
}

impl Default for ConfidenceLevel {
    fn default() -> Self {
        Self::new(0.99).expect("0.99 is a valid confidence level")
    }
}

/// `R diag(s^2) R^T`.
pub fn covariance(g: &FlatGaussian) -> DMat3 {
    let r = g.frame();
    let s2 = g.scales * g.scales;
    r * DMat3::from_diagonal(s2) * r.transpose()
}

/// Flat-axis scale for a scene whose bounds have the given diagonal.
pub fn default_eps_flat(bounds_diagonal: f64) -> f64 {
    if bounds_diagonal > 0.0 && bounds_diagonal.is_finite() {
        EPS_FLAT_RELATIVE * bounds_diagonal
    } else {
        EPS_FLAT_RELATIVE
    }
}

/// Turn a generic 3D Gaussian into a flat one.
///
/// The axis with the smallest scale (lowest index on ties) becomes `r1`
/// with scale `eps_flat`. Columns are permuted cyclically, so the frame
/// stays right-handed.
pub fn flatten(
    mean: DVec3,
    rotation: DQuat,
    scales: DVec3,
    opacity: f64,
    color: DVec3,
    eps_flat: f64,
) -> Result<FlatGaussian> {
    if !(scales.cmpgt(DVec3::ZERO).all() && scales.is_finite()) {
        return Err(Error::Validation(format!(
            "scales must be positive, got {scales:?}"
        )));
    }
    if !(eps_flat > 0.0 && eps_flat.is_finite()) {
        return Err(Error::Validation(format!(
            "flat epsilon must be positive, got {eps_flat}"
        )));
    }
    let q_norm = rotation.length();
    if !(q_norm > 0.0 && q_norm.is_finite()) {
        return Err(Error::Validation("rotation quaternion has zero norm".into()));
    }
    let rotation = rotation / q_norm;

    let s = scales.to_array();
    let mut flat_axis = 0;
    for k in 1..3 {
        if s[k] < s[flat_axis] {
            flat_axis = k;
        }
    }

    let (rotation, scales) = if flat_axis == 0 {
        (rotation, DVec3::new(eps_flat, s[1], s[2]))
    } else {
        let m = DMat3::from_quat(rotation);
        let cols = [m.x_axis, m.y_axis, m.z_axis];
        let a = flat_axis;
        let b = (a + 1) % 3;
        let c = (a + 2) % 3;
        let permuted = DMat3::from_cols(cols[a], cols[b], cols[c]);
        (
            DQuat::from_mat3(&permuted).normalize(),
            DVec3::new(eps_flat, s[b], s[c]),
        )
    };

    Ok(FlatGaussian {
        mean,
        rotation,
        scales,
        opacity,
        color,
    })
}

/// Quaternion with orthonormal frame columns `r1 = r2 x r3`, `r2`, `r3`.
pub(crate) fn quat_from_in_plane_axes(r2: DVec3, r3: DVec3) -> DQuat {
    let r1 = r2.cross(r3);
    DQuat::from_mat3(&DMat3::from_cols(r1, r2, r3)).normalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn splat(rotation: DQuat, scales: DVec3) -> FlatGaussian {
        FlatGaussian {
            mean: DVec3::ZERO,
            rotation,
            scales,
            opacity: 0.5,
            color: DVec3::splat(0.5),
        }
    }

    #[test]
    fn covariance_identity_frame() {
        let eps = 1e-6;
        let g = splat(DQuat::IDENTITY, DVec3::new(eps, 1.0, 1.0));
        let c = covariance(&g);
        let expected = DMat3::from_diagonal(DVec3::new(eps * eps, 1.0, 1.0));
        assert!(c.abs_diff_eq(expected, 1e-15));
    }

    #[test]
    fn covariance_quarter_turn_about_z() {
        let eps = 1e-6;
        let g = splat(DQuat::from_rotation_z(FRAC_PI_2), DVec3::new(eps, 2.0, 1.0));
        let c = covariance(&g);
        let expected = DMat3::from_diagonal(DVec3::new(4.0, eps * eps, 1.0));
        assert!(c.abs_diff_eq(expected, 1e-12), "{c:?}");
    }

    #[test]
    fn flatten_keeps_flat_first_axis() {
        let g = flatten(
            DVec3::ZERO,
            DQuat::IDENTITY,
            DVec3::new(1e-8, 0.3, 0.2),
            0.5,
            DVec3::ONE,
            1e-6,
        )
        .unwrap();
        assert_eq!(g.scales, DVec3::new(1e-6, 0.3, 0.2));
        assert_eq!(g.rotation, DQuat::IDENTITY);
    }

    #[test]
    fn flatten_moves_flat_axis_to_front() {
        let g = flatten(
            DVec3::ZERO,
            DQuat::IDENTITY,
            DVec3::new(0.3, 1e-8, 0.2),
            0.5,
            DVec3::ONE,
            1e-6,
        )
        .unwrap();
        let [r1, r2, r3] = g.axes();
        assert!((r1 - DVec3::Y).length() < 1e-12);
        assert!((g.frame().determinant() - 1.0).abs() < 1e-12);
        assert!((r1 - r2.cross(r3)).length() < 1e-12);
        assert_eq!(g.scales, DVec3::new(1e-6, 0.2, 0.3));
    }

    #[test]
    fn flatten_breaks_ties_by_lowest_axis() {
        let g = flatten(
            DVec3::ZERO,
            DQuat::IDENTITY,
            DVec3::new(0.5, 0.1, 0.1),
            0.5,
            DVec3::ONE,
            1e-6,
        )
        .unwrap();
        assert!((g.axes()[0] - DVec3::Y).length() < 1e-12);
    }

    #[test]
    fn flatten_rejects_nonpositive_scale() {
        let err = flatten(
            DVec3::ZERO,
            DQuat::IDENTITY,
            DVec3::new(0.0, 1.0, 1.0),
            0.5,
            DVec3::ONE,
            1e-6,
        );
        assert!(matches!(err, Err(Error::Validation(_))));
    }

    #[test]
    fn validate_catches_bad_fields() {
        let mut g = splat(DQuat::IDENTITY, DVec3::new(1e-6, 1.0, 1.0));
        assert!(g.validate().is_ok());
        g.opacity = 1.5;
        assert!(g.validate().is_err());
        g.opacity = 0.5;
        g.rotation = DQuat::from_xyzw(0.0, 0.0, 0.0, 2.0);
        assert!(g.validate().is_err());
    }

    #[test]
    fn confidence_level_radius() {
        let level = ConfidenceLevel::new(0.5).unwrap();
        assert!((level.radius() * level.radius() - level.q()).abs() < 1e-14);
        assert!(ConfidenceLevel::new(1.0).is_err());
    }
}
