//! File formats: 3DGS-convention splat PLY, mesh export for external
//! renderers, NeRF-style camera sets and OBJ solid meshes.

mod cameras;
mod export;
mod obj;
mod ply;
mod splat_ply;

pub use cameras::{load_cameras, save_cameras};
pub use export::{export_splat_mesh, read_exported_polygons, ExportStats, MeshFormat};
pub use obj::{load_solid_mesh, parse_obj, LoadedMesh};
pub use ply::{PlyElement, PlyFile, PlyFormat, PlyProperty, PlyScalar, PlyValue};
pub use splat_ply::{load_gs_ply, load_gs_ply_with, save_gs_ply, LoadedSplats, SH_C0};
