//! Declarative affine edits applied through the polygon proxies.

use glam::{DMat3, DVec3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{gaussian_to_polygon, polygon_to_gaussian};
use crate::splat::{ConfidenceLevel, FlatGaussian};

const MIN_ABS_DETERMINANT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    Indices(Vec<usize>),
    Box { min: [f64; 3], max: [f64; 3] },
}

impl Selection {
    fn contains(&self, index: usize, g: &FlatGaussian) -> bool {
        match self {
            Selection::Indices(ids) => ids.contains(&index),
            Selection::Box { min, max } => {
                let lo = DVec3::from_array(*min);
                let hi = DVec3::from_array(*max);
                g.mean.cmpge(lo).all() && g.mean.cmple(hi).all()
            }
        }
    }
}

fn identity_rows() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

/// An affine vertex transform applied to a selection of splats.
///
/// JSON form: `{"select": {"indices": [..]} | {"box": {"min": [..], "max": [..]}},
/// "linear": [[row], [row], [row]], "translate": [x, y, z]}`. `linear` is
/// row-major and defaults to identity; `translate` defaults to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditSpec {
    pub select: Selection,
    #[serde(default = "identity_rows")]
    pub linear: [[f64; 3]; 3],
    #[serde(default)]
    pub translate: [f64; 3],
}

impl EditSpec {
    pub fn new(select: Selection, linear: DMat3, translate: DVec3) -> Self {
        let t = linear.transpose();
        Self {
            select,
            linear: [t.x_axis.to_array(), t.y_axis.to_array(), t.z_axis.to_array()],
            translate: translate.to_array(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)
            .map_err(|e| Error::Validation(format!("invalid edit spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn linear_matrix(&self) -> DMat3 {
        DMat3::from_cols_array_2d(&self.linear).transpose()
    }

    pub fn translation(&self) -> DVec3 {
        DVec3::from_array(self.translate)
    }

    pub fn validate(&self) -> Result<()> {
        let det = self.linear_matrix().determinant();
        if !(det.abs() > MIN_ABS_DETERMINANT) {
            return Err(Error::Validation(format!(
                "edit transform is not invertible (det = {det})"
            )));
        }
        if !self.translation().is_finite() {
            return Err(Error::Validation("edit translation is not finite".into()));
        }
        Ok(())
    }

    pub fn transform_point(&self, p: DVec3) -> DVec3 {
        self.linear_matrix() * p + self.translation()
    }
}

#[derive(Debug, Clone)]
pub struct EditOutcome {
    pub splats: Vec<FlatGaussian>,
    /// Indices of the splats that were selected and rebuilt, ascending.
    pub edited: Vec<usize>,
}

/// Transform the polygon of every selected splat and rebuild its geometry.
/// Opacity, color and the flat-axis scale are preserved; unselected splats
/// are copied untouched.
pub fn apply_edit(
    splats: &[FlatGaussian],
    spec: &EditSpec,
    level: &ConfidenceLevel,
) -> Result<EditOutcome> {
    spec.validate()?;
    if let Selection::Indices(ids) = &spec.select {
        if let Some(&bad) = ids.iter().find(|&&i| i >= splats.len()) {
            return Err(Error::Validation(format!(
                "selected splat {bad} does not exist (scene has {})",
                splats.len()
            )));
        }
    }

    let linear = spec.linear_matrix();
    let translate = spec.translation();
    let rebuilt: Vec<Option<FlatGaussian>> = splats
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            if !spec.select.contains(i, g) {
                return Ok(None);
            }
            let mesh = gaussian_to_polygon(i, g, level).transformed(|p| linear * p + translate);
            let geometry = polygon_to_gaussian(&mesh, level, g.eps_flat())?;
            Ok(Some(geometry.apply_to(g)))
        })
        .collect::<Result<_>>()?;

    let mut edited = Vec::new();
    let out = rebuilt
        .into_iter()
        .zip(splats)
        .enumerate()
        .map(|(i, (new, old))| match new {
            Some(g) => {
                edited.push(i);
                g
            }
            None => *old,
        })
        .collect();
    Ok(EditOutcome {
        splats: out,
        edited,
    })
}
