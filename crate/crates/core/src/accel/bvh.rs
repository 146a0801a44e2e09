use glam::DVec3;

use super::{ray_triangle_intersect, Aabb, Hit, Ray, TriangleKind};

const MAX_LEAF_TRIANGLES: usize = 4;

#[derive(Debug, Clone, Copy)]
struct BvhTriangle {
    vertices: [DVec3; 3],
    /// Global index reported in hits.
    index: usize,
}

/// For leaves `first..first + count` indexes the triangle array; internal
/// nodes have `count == 0` and children at `first` and `first + 1`.
#[derive(Debug, Clone, Copy)]
pub struct BvhNode {
    pub bounds: Aabb,
    first: usize,
    count: usize,
}

impl BvhNode {
    pub fn is_leaf(&self) -> bool {
        self.count > 0
    }
}

/// Immutable bounding volume hierarchy over one triangle soup.
#[derive(Debug, Clone)]
pub struct Bvh {
    kind: TriangleKind,
    nodes: Vec<BvhNode>,
    triangles: Vec<BvhTriangle>,
    skipped: usize,
}

/// Build over `triangles`, whose positions become their global indices.
pub fn build_bvh(triangles: &[[DVec3; 3]], kind: TriangleKind) -> Bvh {
    Bvh::build(triangles.iter().copied().enumerate(), kind)
}

pub fn trace_nearest(ray: &Ray, bvh: &Bvh) -> Option<Hit> {
    bvh.trace_nearest(ray)
}

impl Bvh {
    /// Build over `(global index, triangle)` pairs. Zero-area triangles are
    /// dropped.
    pub fn build(triangles: impl IntoIterator<Item = (usize, [DVec3; 3])>, kind: TriangleKind) -> Self {
        let mut skipped = 0;
        let mut tris: Vec<BvhTriangle> = triangles
            .into_iter()
            .filter_map(|(index, vertices)| {
                let [a, b, c] = vertices;
                let area2 = (b - a).cross(c - a).length();
                if area2 > 0.0 && area2.is_finite() {
                    Some(BvhTriangle { vertices, index })
                } else {
                    skipped += 1;
                    None
                }
            })
            .collect();

        let mut nodes = Vec::with_capacity(2 * tris.len() / MAX_LEAF_TRIANGLES + 1);
        if !tris.is_empty() {
            nodes.push(BvhNode {
                bounds: Aabb::EMPTY,
                first: 0,
                count: 0,
            });
            let len = tris.len();
            build_node(&mut nodes, &mut tris, 0, 0, len);
        }
        Bvh {
            kind,
            nodes,
            triangles: tris,
            skipped,
        }
    }

    pub fn kind(&self) -> TriangleKind {
        self.kind
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Degenerate triangles dropped at build time.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn nodes(&self) -> &[BvhNode] {
        &self.nodes
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes.first().map_or(Aabb::EMPTY, |n| n.bounds)
    }

    /// Nearest hit in `(t_min, t_max)`; ties on `t` go to the smaller
    /// triangle index.
    pub fn trace_nearest(&self, ray: &Ray) -> Option<Hit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv_dir = ray.dir.recip();
        let mut best: Option<(f64, usize)> = None;
        let mut stack = Vec::with_capacity(64);
        stack.push(0usize);
        while let Some(node_index) = stack.pop() {
            let node = &self.nodes[node_index];
            let Some(enter) = node.bounds.entry(ray, inv_dir) else {
                continue;
            };
            if matches!(best, Some((bt, _)) if enter > bt) {
                continue;
            }
            if node.is_leaf() {
                for tri in &self.triangles[node.first..node.first + node.count] {
                    let [a, b, c] = tri.vertices;
                    if let Some(t) = ray_triangle_intersect(ray, a, b, c) {
                        if Hit::precedes(t, tri.index, best) {
                            best = Some((t, tri.index));
                        }
                    }
                }
            } else {
                let (l, r) = (node.first, node.first + 1);
                let el = self.nodes[l].bounds.entry(ray, inv_dir);
                let er = self.nodes[r].bounds.entry(ray, inv_dir);
                // Push the farther child first so the nearer one pops next.
                match (el, er) {
                    (Some(a), Some(b)) if a <= b => stack.extend([r, l]),
                    (Some(_), Some(_)) => stack.extend([l, r]),
                    (Some(_), None) => stack.push(l),
                    (None, Some(_)) => stack.push(r),
                    (None, None) => {}
                }
            }
        }
        best.map(|(t, triangle_index)| Hit {
            t,
            triangle_index,
            kind: self.kind,
        })
    }

    /// Check the structural invariants: every triangle in exactly one leaf,
    /// leaf boxes enclose their triangles, parents enclose children.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.nodes.is_empty() {
            return if self.triangles.is_empty() {
                Ok(())
            } else {
                Err("triangles without nodes".into())
            };
        }
        let mut owner = vec![0usize; self.triangles.len()];
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            if node.is_leaf() {
                for (k, tri) in self.triangles[node.first..node.first + node.count].iter().enumerate() {
                    owner[node.first + k] += 1;
                    if !tri.vertices.iter().all(|v| node.bounds.contains_point(*v)) {
                        return Err(format!("leaf {i} does not contain triangle {}", tri.index));
                    }
                }
            } else {
                for child in [node.first, node.first + 1] {
                    if child >= self.nodes.len() {
                        return Err(format!("node {i} has dangling child {child}"));
                    }
                    if !node.bounds.contains_box(&self.nodes[child].bounds) {
                        return Err(format!("node {i} does not contain child {child}"));
                    }
                    stack.push(child);
                }
            }
        }
        if let Some(k) = owner.iter().position(|&c| c != 1) {
            return Err(format!("triangle slot {k} owned by {} leaves", owner[k]));
        }
        Ok(())
    }
}

fn centroid(t: &BvhTriangle) -> DVec3 {
    (t.vertices[0] + t.vertices[1] + t.vertices[2]) / 3.0
}

fn build_node(nodes: &mut Vec<BvhNode>, tris: &mut [BvhTriangle], node_index: usize, first: usize, end: usize) {
    let slice = &mut tris[first..end];
    let bounds = slice
        .iter()
        .fold(Aabb::EMPTY, |b, t| t.vertices.iter().fold(b, |b, v| b.grow(*v)))
        .padded();
    let count = end - first;
    if count <= MAX_LEAF_TRIANGLES {
        nodes[node_index] = BvhNode { bounds, first, count };
        return;
    }

    let centroid_bounds = slice.iter().fold(Aabb::EMPTY, |b, t| b.grow(centroid(t)));
    let extent = centroid_bounds.extent();
    let axis = if extent.x >= extent.y && extent.x >= extent.z {
        0
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };
    slice.sort_by(|a, b| {
        centroid(a)[axis]
            .total_cmp(&centroid(b)[axis])
            .then(a.index.cmp(&b.index))
    });
    let mid = first + count / 2;

    let left = nodes.len();
    let placeholder = BvhNode {
        bounds: Aabb::EMPTY,
        first: 0,
        count: 0,
    };
    nodes.push(placeholder);
    nodes.push(placeholder);
    nodes[node_index] = BvhNode {
        bounds,
        first: left,
        count: 0,
    };
    build_node(nodes, tris, left, first, mid);
    build_node(nodes, tris, left + 1, mid, end);
}
