//! Ray-traced flat Gaussian splats.
//!
//! Each splat is approximated by an eight-sided polygon sized by a
//! chi-square confidence level. Rays are traced against the polygons with a
//! BVH, colors are composited front to back, solid meshes add shadows,
//! mirrors and glass, and editing the polygons edits the splats.

// `!(x > 0.0)` style checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accel;
pub mod camera;
pub mod chi2;
pub mod edit;
pub mod error;
pub mod fit;
pub mod fixtures;
pub mod io;
pub mod mesh;
pub mod render;
pub mod scene;
pub mod splat;

pub use camera::Camera;
pub use edit::{apply_edit, EditOutcome, EditSpec, Selection};
pub use error::{Error, Result};
pub use mesh::{gaussian_to_polygon, polygon_to_gaussian, SplatMesh};
pub use render::{aggregate_color, render_image, Image, PreparedScene, RayTraceRecord, RenderConfig};
pub use scene::{Material, MaterialKind, PointLight, Scene, SolidMesh};
pub use splat::{flatten, ConfidenceLevel, FlatGaussian};
