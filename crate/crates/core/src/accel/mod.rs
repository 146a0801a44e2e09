//! Software ray tracing over triangle soups: ray-triangle intersection and
//! a median-split bounding volume hierarchy.

mod aabb;
mod bvh;
mod ray;

pub use aabb::Aabb;
pub use bvh::{build_bvh, trace_nearest, Bvh, BvhNode};
pub use ray::{ray_triangle_intersect, Hit, Ray, TriangleKind};
