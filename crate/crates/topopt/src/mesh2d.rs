//! Structured triangulations of rectangles, merged into the fixed design
//! domain, with labeled boundary edges.
//!
//! Each rectangle is meshed as an nx-by-ny grid of quads, every quad split
//! along the lower-left to upper-right diagonal. The four boundary sides carry
//! integer labels in the order (bottom, right, top, left). Merging unifies
//! coincident nodes (tolerance 1e-12) and drops boundary edges that become
//! interior to the union.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Tolerance for identifying coincident nodes when merging meshes. Grids are
/// built from identical arithmetic, so interface hits are expected to be exact.
pub const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub label: i32,
}

/// Triangulation of the fixed design domain.
#[derive(Debug, Clone)]
pub struct TriMesh {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    regions: Vec<i32>,
    boundary_edges: Vec<BoundaryEdge>,
    areas: Vec<f64>,
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl TriMesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn regions(&self) -> &[i32] {
        &self.regions
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn area(&self, tri: usize) -> f64 {
        self.areas[tri]
    }

    /// Total area of the design domain (sum of element areas).
    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn triangle_coords(&self, tri: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[tri];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    /// Sorted, deduplicated node indices lying on boundary edges with one of
    /// the given labels.
    pub fn boundary_nodes_with_labels(&self, labels: &[i32]) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .boundary_edges
            .iter()
            .filter(|e| labels.contains(&e.label))
            .flat_map(|e| e.nodes)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Boundary edges carrying one of the given labels.
    pub fn boundary_edges_with_labels(&self, labels: &[i32]) -> Vec<BoundaryEdge> {
        self.boundary_edges
            .iter()
            .filter(|e| labels.contains(&e.label))
            .copied()
            .collect()
    }

    fn compute_areas(nodes: &[[f64; 2]], triangles: &[[usize; 3]]) -> Result<Vec<f64>> {
        triangles
            .iter()
            .map(|&[a, b, c]| {
                let s = signed_area(nodes[a], nodes[b], nodes[c]);
                if s <= 0.0 {
                    return Err(Error::InvalidGeometry(format!(
                        "triangle ({a},{b},{c}) has non-positive area {s}"
                    )));
                }
                Ok(s)
            })
            .collect()
    }

    fn new(
        nodes: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        regions: Vec<i32>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        let areas = Self::compute_areas(&nodes, &triangles)?;
        Ok(Self {
            nodes,
            triangles,
            regions,
            boundary_edges,
            areas,
        })
    }

    /// Check the structural invariants: positive areas (built in), every
    /// boundary edge adjacent to exactly one triangle, all indices in range.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        for &[a, b, c] in &self.triangles {
            if a >= n || b >= n || c >= n {
                return Err(Error::InvalidGeometry("triangle node out of range".into()));
            }
        }
        let adjacency = edge_triangle_counts(&self.triangles);
        for e in &self.boundary_edges {
            if e.nodes[0] >= n || e.nodes[1] >= n {
                return Err(Error::InvalidGeometry("edge node out of range".into()));
            }
            let key = edge_key(e.nodes[0], e.nodes[1]);
            match adjacency.get(&key) {
                Some(1) => {}
                Some(k) => {
                    return Err(Error::InvalidGeometry(format!(
                        "boundary edge {:?} adjacent to {k} triangles",
                        e.nodes
                    )))
                }
                None => {
                    return Err(Error::InvalidGeometry(format!(
                        "boundary edge {:?} not an element edge",
                        e.nodes
                    )))
                }
            }
        }
        Ok(())
    }
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn edge_triangle_counts(triangles: &[[usize; 3]]) -> HashMap<(usize, usize), u32> {
    let mut counts = HashMap::with_capacity(triangles.len() * 3 / 2);
    for &[a, b, c] in triangles {
        for (p, q) in [(a, b), (b, c), (c, a)] {
            *counts.entry(edge_key(p, q)).or_insert(0) += 1;
        }
    }
    counts
}

/// Structured grid of a rectangle: (nx+1)(ny+1) nodes, 2 nx ny triangles,
/// boundary labels (bottom, right, top, left) = labels[0..3].
pub fn build_rect_grid(
    pos0: [f64; 2],
    pos1: [f64; 2],
    nx: usize,
    ny: usize,
    labels: [i32; 4],
) -> Result<TriMesh> {
    if !(pos1[0] > pos0[0] && pos1[1] > pos0[1]) {
        return Err(Error::InvalidGeometry(format!(
            "degenerate rectangle {pos0:?}..{pos1:?}"
        )));
    }
    if nx < 1 || ny < 1 {
        return Err(Error::InvalidGeometry(format!(
            "grid needs nx, ny >= 1 (got {nx}, {ny})"
        )));
    }
    let node_id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = pos0[0] + (pos1[0] - pos0[0]) * (i as f64 / nx as f64);
            let y = pos0[1] + (pos1[1] - pos0[1]) * (j as f64 / ny as f64);
            nodes.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let a = node_id(i, j);
            let b = node_id(i + 1, j);
            let c = node_id(i + 1, j + 1);
            let d = node_id(i, j + 1);
            // split along the lower-left -> upper-right diagonal, CCW
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let regions = vec![1; triangles.len()];
    let mut boundary_edges = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        boundary_edges.push(BoundaryEdge {
            nodes: [node_id(i, 0), node_id(i + 1, 0)],
            label: labels[0],
        });
        boundary_edges.push(BoundaryEdge {
            nodes: [node_id(i, ny), node_id(i + 1, ny)],
            label: labels[2],
        });
    }
    for j in 0..ny {
        boundary_edges.push(BoundaryEdge {
            nodes: [node_id(nx, j), node_id(nx, j + 1)],
            label: labels[1],
        });
        boundary_edges.push(BoundaryEdge {
            nodes: [node_id(0, j), node_id(0, j + 1)],
            label: labels[3],
        });
    }
    TriMesh::new(nodes, triangles, regions, boundary_edges)
}

/// Spatial hash keyed on coordinates quantized by `MERGE_TOL`, probing the
/// 3x3 neighborhood so points within the tolerance always collide.
struct NodeHash {
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl NodeHash {
    fn new() -> Self {
        Self {
            cells: HashMap::new(),
        }
    }

    fn cell_of(p: [f64; 2]) -> (i64, i64) {
        (
            (p[0] / MERGE_TOL).round() as i64,
            (p[1] / MERGE_TOL).round() as i64,
        )
    }

    fn insert(&mut self, p: [f64; 2], id: usize) {
        self.cells.entry(Self::cell_of(p)).or_default().push(id);
    }

    fn find(&self, p: [f64; 2], nodes: &[[f64; 2]]) -> Option<usize> {
        let (cx, cy) = Self::cell_of(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.cells.get(&(cx + dx, cy + dy)) {
                    for &id in ids {
                        let q = nodes[id];
                        if (q[0] - p[0]).abs() <= MERGE_TOL && (q[1] - p[1]).abs() <= MERGE_TOL {
                            return Some(id);
                        }
                    }
                }
            }
        }
        None
    }
}

/// Merge two meshes sharing interface nodes. Duplicate nodes are unified,
/// indices remapped, and former boundary edges interior to the union removed.
pub fn merge_meshes(a: &TriMesh, b: &TriMesh) -> Result<TriMesh> {
    let mut nodes = a.nodes.clone();
    let mut hash = NodeHash::new();
    for (i, &p) in nodes.iter().enumerate() {
        hash.insert(p, i);
    }
    let mut remap = Vec::with_capacity(b.nodes.len());
    for &p in &b.nodes {
        match hash.find(p, &nodes) {
            Some(id) => remap.push(id),
            None => {
                let id = nodes.len();
                nodes.push(p);
                hash.insert(p, id);
                remap.push(id);
            }
        }
    }

    let mut triangles = a.triangles.clone();
    triangles.extend(
        b.triangles
            .iter()
            .map(|&[p, q, r]| [remap[p], remap[q], remap[r]]),
    );
    let mut regions = a.regions.clone();
    regions.extend_from_slice(&b.regions);

    // Reject duplicated elements (e.g. merging a mesh with itself).
    {
        let mut keys: Vec<[usize; 3]> = triangles
            .iter()
            .map(|&t| {
                let mut s = t;
                s.sort_unstable();
                s
            })
            .collect();
        keys.sort_unstable();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::MergeMismatch("duplicate triangles in union".into()));
        }
    }

    let adjacency = edge_triangle_counts(&triangles);
    let mut boundary_edges: Vec<BoundaryEdge> = Vec::new();
    let mut dropped = 0usize;
    for (edges, map) in [(&a.boundary_edges, None), (&b.boundary_edges, Some(&remap))] {
        for e in edges.iter() {
            let nodes = match map {
                None => e.nodes,
                Some(m) => [m[e.nodes[0]], m[e.nodes[1]]],
            };
            match adjacency.get(&edge_key(nodes[0], nodes[1])).copied() {
                Some(1) => boundary_edges.push(BoundaryEdge {
                    nodes,
                    label: e.label,
                }),
                Some(_) => dropped += 1, // interior to the union
                None => {
                    return Err(Error::MergeMismatch(
                        "boundary edge lost its supporting triangle".into(),
                    ))
                }
            }
        }
    }
    // Interface edges come in pairs (one from each side); an odd drop count
    // means the discretizations did not line up edge-for-edge.
    if !dropped.is_multiple_of(2) {
        return Err(Error::MergeMismatch(
            "interface discretizations do not match".into(),
        ));
    }

    // Overlap check: mismatched interfaces leave boundary edges from both
    // sides covering the same segment without sharing node pairs.
    let merged = TriMesh::new(nodes, triangles, regions, boundary_edges)?;
    detect_interface_mismatch(&merged)?;
    Ok(merged)
}

fn detect_interface_mismatch(mesh: &TriMesh) -> Result<()> {
    // A mismatch shows up as the midpoint of one surviving boundary edge lying
    // strictly inside another. O(E^2) over the hull only.
    let edges = &mesh.boundary_edges;
    for (i, e) in edges.iter().enumerate() {
        let p = mesh.nodes[e.nodes[0]];
        let q = mesh.nodes[e.nodes[1]];
        let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
        for (j, f) in edges.iter().enumerate() {
            if i == j {
                continue;
            }
            let a = mesh.nodes[f.nodes[0]];
            let b = mesh.nodes[f.nodes[1]];
            if point_strictly_inside_segment(mid, a, b) {
                return Err(Error::MergeMismatch(format!(
                    "boundary edges {:?} and {:?} overlap (interface discretizations differ)",
                    e.nodes, f.nodes
                )));
            }
        }
    }
    Ok(())
}

fn point_strictly_inside_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return false;
    }
    let t = (ap[0] * ab[0] + ap[1] * ab[1]) / len2;
    let tol = MERGE_TOL;
    let margin = tol / len2.sqrt();
    if t <= margin || t >= 1.0 - margin {
        return false;
    }
    let proj = [a[0] + t * ab[0], a[1] + t * ab[1]];
    let d2 = (p[0] - proj[0]).powi(2) + (p[1] - proj[1]).powi(2);
    d2 <= tol * tol
}

/// One rectangular patch of a model geometry.
#[derive(Debug, Clone)]
pub struct RectPatch {
    pub pos0: [f64; 2],
    pub pos1: [f64; 2],
    /// cells at resMesh = 1; scaled linearly with the resolution factor
    pub nx: usize,
    pub ny: usize,
    pub labels: [i32; 4],
}

/// Geometry recipe plus boundary-label sets and load data for one model.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub name: String,
    pub rectangles: Vec<RectPatch>,
    /// labels with zero displacement
    pub wall_labels: Vec<i32>,
    /// labels carrying the surface traction
    pub traction_labels: Vec<i32>,
    /// labels where the level set is pinned to 1
    pub phione_labels: Vec<i32>,
    /// unused in 2D
    pub depth: f64,
}

impl ModelSpec {
    /// Build the merged design-domain mesh at the given resolution factor.
    pub fn build_mesh(&self, res_mesh: usize) -> Result<TriMesh> {
        if res_mesh < 1 {
            return Err(Error::InvalidGeometry("resMesh must be >= 1".into()));
        }
        if self
            .wall_labels
            .iter()
            .any(|l| self.traction_labels.contains(l))
        {
            return Err(Error::InvalidGeometry(
                "wall and traction labels overlap".into(),
            ));
        }
        let mut mesh: Option<TriMesh> = None;
        for r in &self.rectangles {
            let grid = build_rect_grid(r.pos0, r.pos1, r.nx * res_mesh, r.ny * res_mesh, r.labels)?;
            mesh = Some(match mesh {
                None => grid,
                Some(m) => merge_meshes(&m, &grid)?,
            });
        }
        mesh.ok_or_else(|| Error::InvalidGeometry("model has no rectangles".into()))
    }
}

/// Cantilever: D = [0,2]x[0,1] from three full-width strips so the traction
/// segment x = 2, y in [0.46, 0.54] gets its own label. Left edge clamped,
/// traction and the phi = 1 pin on label 6.
pub fn cantilever_model(res_mesh: usize) -> Result<(ModelSpec, TriMesh)> {
    let spec = ModelSpec {
        name: "cantilever".into(),
        rectangles: vec![
            RectPatch {
                pos0: [0.0, 0.0],
                pos1: [2.0, 0.46],
                nx: 50,
                ny: 11,
                labels: [1, 2, 3, 4],
            },
            RectPatch {
                pos0: [0.0, 0.46],
                pos1: [2.0, 0.54],
                nx: 50,
                ny: 2,
                labels: [5, 6, 7, 8],
            },
            RectPatch {
                pos0: [0.0, 0.54],
                pos1: [2.0, 1.0],
                nx: 50,
                ny: 11,
                labels: [9, 10, 11, 12],
            },
        ],
        wall_labels: vec![4, 8, 12],
        traction_labels: vec![6],
        phione_labels: vec![6],
        depth: 1.0,
    };
    let mesh = spec.build_mesh(res_mesh)?;
    Ok((spec, mesh))
}

/// Bridge: D = [0,2]x[0,1] from five full-height vertical strips. The bottom
/// corners (width 0.1) are clamped and a downward traction acts on a 0.08-wide
/// segment centered on the bottom edge. The exact boundary layout of the
/// source figures is not machine-readable; this conventional stand-in is
/// overridable through the geometry recipe.
pub fn bridge_model(res_mesh: usize) -> Result<(ModelSpec, TriMesh)> {
    let spec = ModelSpec {
        name: "bridge".into(),
        rectangles: vec![
            RectPatch {
                pos0: [0.0, 0.0],
                pos1: [0.1, 1.0],
                nx: 3,
                ny: 22,
                labels: [1, 2, 3, 4],
            },
            RectPatch {
                pos0: [0.1, 0.0],
                pos1: [0.96, 1.0],
                nx: 21,
                ny: 22,
                labels: [5, 6, 7, 8],
            },
            RectPatch {
                pos0: [0.96, 0.0],
                pos1: [1.04, 1.0],
                nx: 2,
                ny: 22,
                labels: [9, 10, 11, 12],
            },
            RectPatch {
                pos0: [1.04, 0.0],
                pos1: [1.9, 1.0],
                nx: 21,
                ny: 22,
                labels: [13, 14, 15, 16],
            },
            RectPatch {
                pos0: [1.9, 0.0],
                pos1: [2.0, 1.0],
                nx: 3,
                ny: 22,
                labels: [17, 18, 19, 20],
            },
        ],
        wall_labels: vec![1, 17],
        traction_labels: vec![9],
        phione_labels: vec![9],
        depth: 1.0,
    };
    let mesh = spec.build_mesh(res_mesh)?;
    Ok((spec, mesh))
}

/// Radiator: unit square from five full-width horizontal strips. Left edge
/// clamped; traction on three 0.08-high segments of the right edge (bottom,
/// middle, top). Same stand-in caveat as the bridge model.
pub fn radiator_model(res_mesh: usize) -> Result<(ModelSpec, TriMesh)> {
    let spec = ModelSpec {
        name: "radiator".into(),
        rectangles: vec![
            RectPatch {
                pos0: [0.0, 0.0],
                pos1: [1.0, 0.08],
                nx: 31,
                ny: 2,
                labels: [1, 2, 3, 4],
            },
            RectPatch {
                pos0: [0.0, 0.08],
                pos1: [1.0, 0.46],
                nx: 31,
                ny: 10,
                labels: [5, 6, 7, 8],
            },
            RectPatch {
                pos0: [0.0, 0.46],
                pos1: [1.0, 0.54],
                nx: 31,
                ny: 2,
                labels: [9, 10, 11, 12],
            },
            RectPatch {
                pos0: [0.0, 0.54],
                pos1: [1.0, 0.92],
                nx: 31,
                ny: 10,
                labels: [13, 14, 15, 16],
            },
            RectPatch {
                pos0: [0.0, 0.92],
                pos1: [1.0, 1.0],
                nx: 31,
                ny: 2,
                labels: [17, 18, 19, 20],
            },
        ],
        wall_labels: vec![4, 8, 12, 16, 20],
        traction_labels: vec![2, 10, 18],
        phione_labels: vec![2, 10, 18],
        depth: 1.0,
    };
    let mesh = spec.build_mesh(res_mesh)?;
    Ok((spec, mesh))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_grid_counts() {
        let m = build_rect_grid([0.0, 0.0], [1.0, 1.0], 1, 1, [1, 2, 3, 4]).unwrap();
        assert_eq!(m.node_count(), 4);
        assert_eq!(m.triangle_count(), 2);
        assert_eq!(m.boundary_edges().len(), 4);
        m.validate().unwrap();
    }

    #[test]
    fn grid_triangle_count_formula() {
        // brute-force counting oracle: 2 triangles per quad cell
        let (nx, ny) = (200, 44);
        let m = build_rect_grid([0.0, 0.0], [2.0, 0.46], nx, ny, [1, 2, 3, 4]).unwrap();
        let mut count = 0;
        for _ in 0..nx {
            for _ in 0..ny {
                count += 2;
            }
        }
        assert_eq!(count, 17600);
        assert_eq!(m.triangle_count(), count);
        assert_eq!(m.node_count(), (nx + 1) * (ny + 1));
    }

    #[test]
    fn degenerate_rectangle_is_rejected() {
        assert!(matches!(
            build_rect_grid([0.0, 0.0], [0.0, 1.0], 1, 1, [1, 2, 3, 4]),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(matches!(
            build_rect_grid([0.0, 0.0], [1.0, 1.0], 0, 1, [1, 2, 3, 4]),
            Err(Error::InvalidGeometry(_))
        ));
    }

    #[test]
    fn merge_two_unit_squares() {
        let a = build_rect_grid([0.0, 0.0], [1.0, 1.0], 1, 1, [1, 2, 3, 4]).unwrap();
        let b = build_rect_grid([1.0, 0.0], [2.0, 1.0], 1, 1, [5, 6, 7, 8]).unwrap();
        let m = merge_meshes(&a, &b).unwrap();
        assert_eq!(m.node_count(), 6);
        assert_eq!(m.triangle_count(), 4);
        // shared edge removed from both boundary lists: 4 + 4 - 2
        assert_eq!(m.boundary_edges().len(), 6);
        m.validate().unwrap();
    }

    #[test]
    fn merge_with_itself_is_an_error() {
        let a = build_rect_grid([0.0, 0.0], [1.0, 1.0], 2, 2, [1, 2, 3, 4]).unwrap();
        assert!(matches!(merge_meshes(&a, &a), Err(Error::MergeMismatch(_))));
    }

    #[test]
    fn merge_mismatched_interface_is_an_error() {
        let a = build_rect_grid([0.0, 0.0], [1.0, 1.0], 1, 1, [1, 2, 3, 4]).unwrap();
        let b = build_rect_grid([1.0, 0.0], [2.0, 1.0], 2, 2, [5, 6, 7, 8]).unwrap();
        assert!(matches!(merge_meshes(&a, &b), Err(Error::MergeMismatch(_))));
    }

    #[test]
    fn cantilever_mesh_counts() {
        let (_, m4) = cantilever_model(4).unwrap();
        assert_eq!(m4.triangle_count(), 38400);
        // counting oracle for the merged node total at resMesh = 4:
        // three strips of 201 x (45, 9, 45) rows minus two duplicated rows
        assert_eq!(m4.node_count(), 201 * (45 + 9 + 45) - 2 * 201);
        let (_, m1) = cantilever_model(1).unwrap();
        assert_eq!(m1.triangle_count(), 2 * 50 * (11 + 2 + 11));
        m4.validate().unwrap();
    }

    #[test]
    fn cantilever_max_edge_length() {
        let (_, m) = cantilever_model(4).unwrap();
        let mut hmax = 0.0f64;
        for t in 0..m.triangle_count() {
            let c = m.triangle_coords(t);
            for (p, q) in [(c[0], c[1]), (c[1], c[2]), (c[2], c[0])] {
                hmax = hmax.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
            }
        }
        assert!((hmax - 0.0144).abs() < 2e-4, "hmax = {hmax}");
    }

    #[test]
    fn cantilever_traction_geometry() {
        let (spec, m) = cantilever_model(1).unwrap();
        let edges = m.boundary_edges_with_labels(&spec.traction_labels);
        let total: f64 = edges
            .iter()
            .map(|e| {
                let p = m.nodes()[e.nodes[0]];
                let q = m.nodes()[e.nodes[1]];
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
            })
            .sum();
        assert!((total - 0.08).abs() < 1e-12);
        for e in edges {
            for nid in e.nodes {
                assert!((m.nodes()[nid][0] - 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cantilever_area_is_exact() {
        let (_, m) = cantilever_model(2).unwrap();
        assert!((m.total_area() - 2.0).abs() < 1e-12 * 2.0);
    }

    #[test]
    fn bridge_and_radiator_triangle_budgets() {
        let (spec_b, mb) = bridge_model(4).unwrap();
        let nt = mb.triangle_count() as f64;
        assert!((nt - 35000.0).abs() / 35000.0 < 0.05, "bridge nt = {nt}");
        let (spec_r, mr) = radiator_model(4).unwrap();
        let nt = mr.triangle_count() as f64;
        assert!((nt - 25600.0).abs() / 25600.0 < 0.05, "radiator nt = {nt}");
        for spec in [&spec_b, &spec_r] {
            assert!(spec
                .wall_labels
                .iter()
                .all(|l| !spec.traction_labels.contains(l)));
        }
        mb.validate().unwrap();
        mr.validate().unwrap();
    }

    #[test]
    fn builders_are_deterministic() {
        let (_, a) = cantilever_model(2).unwrap();
        let (_, b) = cantilever_model(2).unwrap();
        assert_eq!(a.nodes(), b.nodes());
        assert_eq!(a.triangles(), b.triangles());
        assert_eq!(a.boundary_edges(), b.boundary_edges());
    }

    #[test]
    fn boundary_nodes_lie_on_the_hull() {
        let (_, m) = cantilever_model(1).unwrap();
        for e in m.boundary_edges() {
            for nid in e.nodes {
                let [x, y] = m.nodes()[nid];
                let on_hull = x.abs() < 1e-12
                    || (x - 2.0).abs() < 1e-12
                    || y.abs() < 1e-12
                    || (y - 1.0).abs() < 1e-12;
                assert!(on_hull, "node {nid} at ({x},{y}) not on the hull");
            }
        }
    }
}
