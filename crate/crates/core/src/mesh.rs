//! Perturbed triangular base meshes, uniform refinement and straight prism
//! extrusion with full facet topology.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::{Error, Result};

pub type Point2 = [f64; 2];
pub type Point3 = [f64; 3];

/// A boundary edge of the base mesh with its outward unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub normal: Point2,
    pub triangle: usize,
    pub local_edge: usize,
}

/// Triangulation of the square `[0, lx]²`, counterclockwise triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseMesh2d {
    pub lx: f64,
    pub vertices: Vec<Point2>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
}

/// An edge of the base mesh seen from one or two triangles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// (triangle, local edge) of the first triangle that lists the edge.
    pub left: (usize, usize),
    pub right: Option<(usize, usize)>,
}

/// Local edge `e` of a triangle joins its vertices `e` and `(e + 1) % 3`.
pub fn local_edge_vertices(tri: &[usize; 3], e: usize) -> [usize; 2] {
    [tri[e], tri[(e + 1) % 3]]
}

fn signed_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl BaseMesh2d {
    fn from_parts(lx: f64, vertices: Vec<Point2>, triangles: Vec<[usize; 3]>) -> Self {
        let mut mesh = BaseMesh2d {
            lx,
            vertices,
            triangles,
            boundary_edges: Vec::new(),
        };
        let boundary = mesh
            .edges()
            .into_iter()
            .filter(|e| e.right.is_none())
            .map(|e| {
                let (t, le) = e.left;
                let [a, b] = e.vertices;
                let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
                let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
                let len = (dx * dx + dy * dy).sqrt();
                BoundaryEdge {
                    vertices: e.vertices,
                    normal: [dy / len, -dx / len],
                    triangle: t,
                    local_edge: le,
                }
            })
            .collect();
        mesh.boundary_edges = boundary;
        mesh
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    /// All edges in a deterministic order (sorted by vertex pair).
    pub fn edges(&self) -> Vec<Edge> {
        let mut map: BTreeMap<(usize, usize), Edge> = BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for e in 0..3 {
                let [a, b] = local_edge_vertices(tri, e);
                let key = (a.min(b), a.max(b));
                map.entry(key)
                    .and_modify(|edge| edge.right = Some((t, e)))
                    .or_insert(Edge {
                        vertices: [a, b],
                        left: (t, e),
                        right: None,
                    });
            }
        }
        map.into_values().collect()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        let [x, y] = self.vertices[v];
        x == 0.0 || y == 0.0 || x == self.lx || y == self.lx
    }
}

/// Regular right-triangle grid of `2n²` triangles on `[0, lx]²` with every
/// interior vertex shifted by up to `perturb·Δx` in each coordinate.
///
/// Offsets are `(2u − 1)·perturb·Δx` with `u` uniform in `[0, 1)` drawn from a
/// ChaCha8 stream seeded by `seed`, x then y, vertices in index order.
pub fn build_base_mesh(n: usize, lx: f64, perturb: f64, seed: u64) -> Result<BaseMesh2d> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 cells per side, got {n}")));
    }
    if !(0.0..0.5).contains(&perturb) {
        return Err(Error::InvalidInput(format!("perturbation {perturb} outside [0, 0.5)")));
    }
    if lx <= 0.0 {
        return Err(Error::InvalidInput(format!("domain length {lx} must be positive")));
    }
    let dx = lx / n as f64;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = move || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            // Exact endpoints keep boundary vertices on the boundary.
            let coord = |k: usize| if k == n { lx } else { k as f64 * dx };
            let mut p = [coord(i), coord(j)];
            if i > 0 && i < n && j > 0 && j < n && perturb > 0.0 {
                p[0] += (2.0 * uniform() - 1.0) * perturb * dx;
                p[1] += (2.0 * uniform() - 1.0) * perturb * dx;
            }
            vertices.push(p);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    Ok(BaseMesh2d::from_parts(lx, vertices, triangles))
}

/// Splits every triangle into four through its edge midpoints. Existing
/// vertices keep their indices, so coarse vertices are a subset of fine ones.
pub fn refine(base: &BaseMesh2d) -> BaseMesh2d {
    let mut vertices = base.vertices.clone();
    let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point2>| -> usize {
        *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let (pa, pb) = (vertices[a], vertices[b]);
            vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
            vertices.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * base.triangles.len());
    for &[a, b, c] in &base.triangles {
        let ab = mid(a, b, &mut vertices);
        let bc = mid(b, c, &mut vertices);
        let ca = mid(c, a, &mut vertices);
        triangles.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
    }
    BaseMesh2d::from_parts(base.lx, vertices, triangles)
}

/// Local facets of a prism: 0 bottom, 1 top, `2 + e` the quad over local edge `e`.
pub const N_LOCAL_FACETS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FacetSide {
    pub cell: usize,
    pub local: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacetKind {
    /// Quadrilateral over a base edge within one layer.
    Vertical { layer: usize, edge: [usize; 2] },
    /// Triangle between layers; `interface` counts from the bottom, so the
    /// periodic wrap facet has `interface == n_layers`.
    Horizontal { triangle: usize, interface: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub kind: FacetKind,
    pub plus: FacetSide,
    pub minus: Option<FacetSide>,
    /// Unit normal pointing out of the + cell.
    pub normal: Point3,
    pub area: f64,
    pub h_e: f64,
}

impl Facet {
    pub fn is_boundary(&self) -> bool {
        self.minus.is_none()
    }
}

/// Affine geometry of one prism: `x = v0 + J (ξ, η)`, `z = z0 + ζ·dz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    pub v0: Point2,
    pub jac: [[f64; 2]; 2],
    pub inv_jac: [[f64; 2]; 2],
    pub det2: f64,
    pub z0: f64,
    pub dz: f64,
}

impl CellGeometry {
    pub fn volume(&self) -> f64 {
        0.5 * self.det2 * self.dz
    }

    pub fn to_physical(&self, r: &Point3) -> Point3 {
        let j = &self.jac;
        [
            self.v0[0] + j[0][0] * r[0] + j[0][1] * r[1],
            self.v0[1] + j[1][0] * r[0] + j[1][1] * r[1],
            self.z0 + r[2] * self.dz,
        ]
    }

    /// Reference coordinates of a physical point; ζ is taken from `z` as given.
    pub fn to_reference(&self, x: &Point3) -> Point3 {
        let (dx, dy) = (x[0] - self.v0[0], x[1] - self.v0[1]);
        let ji = &self.inv_jac;
        [ji[0][0] * dx + ji[0][1] * dy, ji[1][0] * dx + ji[1][1] * dy, (x[2] - self.z0) / self.dz]
    }

    /// Physical gradient from a reference gradient.
    pub fn grad_to_physical(&self, g: &Point3) -> Point3 {
        let ji = &self.inv_jac;
        [
            ji[0][0] * g[0] + ji[1][0] * g[1],
            ji[0][1] * g[0] + ji[1][1] * g[1],
            g[2] / self.dz,
        ]
    }
}

/// Straight extrusion of a base mesh into prisms.
///
/// Cells are numbered `layer · n_triangles + triangle`. In planar mode the
/// mesh is a single layer of unit thickness without horizontal facets and
/// represents a genuinely two-dimensional problem.
#[derive(Debug, Clone, PartialEq)]
pub struct PrismMesh {
    pub base: BaseMesh2d,
    pub n_layers: usize,
    pub lz: f64,
    pub periodic_z: bool,
    pub planar: bool,
    pub facets: Vec<Facet>,
    /// Facet index per (cell, local facet); `None` only for planar top/bottom.
    pub cell_facets: Vec<[Option<usize>; N_LOCAL_FACETS]>,
}

pub fn extrude(base: &BaseMesh2d, n_layers: usize, lz: f64, periodic_z: bool) -> Result<PrismMesh> {
    if n_layers == 0 {
        return Err(Error::InvalidInput("extrusion needs at least one layer".into()));
    }
    if periodic_z && n_layers < 2 {
        return Err(Error::InvalidInput(
            "periodic extrusion needs at least two layers so the wrap facets are distinct".into(),
        ));
    }
    if lz <= 0.0 {
        return Err(Error::InvalidInput(format!("extrusion length {lz} must be positive")));
    }
    Ok(PrismMesh::build(base, n_layers, lz, periodic_z, false))
}

/// Single unit-thickness layer without horizontal facets (2D problems).
pub fn extrude_planar(base: &BaseMesh2d) -> PrismMesh {
    PrismMesh::build(base, 1, 1.0, false, true)
}

impl PrismMesh {
    fn build(base: &BaseMesh2d, n_layers: usize, lz: f64, periodic_z: bool, planar: bool) -> Self {
        let ntri = base.n_triangles();
        let ncells = ntri * n_layers;
        let dz = lz / n_layers as f64;
        let mut mesh = PrismMesh {
            base: base.clone(),
            n_layers,
            lz,
            periodic_z,
            planar,
            facets: Vec::new(),
            cell_facets: alloc::vec![[None; N_LOCAL_FACETS]; ncells],
        };
        let vol = |t: usize| base.triangle_area(t) * dz;
        let edges = base.edges();
        for layer in 0..n_layers {
            for e in &edges {
                let [a, b] = e.vertices;
                let (pa, pb) = (base.vertices[a], base.vertices[b]);
                let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
                let len = (dx * dx + dy * dy).sqrt();
                let area = len * dz;
                let plus = FacetSide {
                    cell: layer * ntri + e.left.0,
                    local: 2 + e.left.1,
                };
                let minus = e.right.map(|(t, le)| FacetSide {
                    cell: layer * ntri + t,
                    local: 2 + le,
                });
                let h_e = match e.right {
                    Some((t, _)) => (vol(e.left.0) + vol(t)) / (2.0 * area),
                    None => vol(e.left.0) / area,
                };
                mesh.push_facet(Facet {
                    kind: FacetKind::Vertical { layer, edge: e.vertices },
                    plus,
                    minus,
                    normal: [dy / len, -dx / len, 0.0],
                    area,
                    h_e,
                });
            }
        }
        if !planar {
            for t in 0..ntri {
                let area = base.triangle_area(t);
                let top_interfaces = if periodic_z { n_layers } else { n_layers - 1 };
                if !periodic_z {
                    mesh.push_facet(Facet {
                        kind: FacetKind::Horizontal { triangle: t, interface: 0 },
                        plus: FacetSide { cell: t, local: 0 },
                        minus: None,
                        normal: [0.0, 0.0, -1.0],
                        area,
                        h_e: vol(t) / area,
                    });
                }
                for i in 1..=top_interfaces {
                    let below = (i - 1) * ntri + t;
                    let above = (i % n_layers) * ntri + t;
                    mesh.push_facet(Facet {
                        kind: FacetKind::Horizontal { triangle: t, interface: i },
                        plus: FacetSide { cell: below, local: 1 },
                        minus: Some(FacetSide { cell: above, local: 0 }),
                        normal: [0.0, 0.0, 1.0],
                        area,
                        h_e: vol(t) / area,
                    });
                }
                if !periodic_z {
                    mesh.push_facet(Facet {
                        kind: FacetKind::Horizontal { triangle: t, interface: n_layers },
                        plus: FacetSide { cell: (n_layers - 1) * ntri + t, local: 1 },
                        minus: None,
                        normal: [0.0, 0.0, 1.0],
                        area,
                        h_e: vol(t) / area,
                    });
                }
            }
        }
        mesh
    }

    fn push_facet(&mut self, f: Facet) {
        let idx = self.facets.len();
        self.cell_facets[f.plus.cell][f.plus.local] = Some(idx);
        if let Some(m) = f.minus {
            self.cell_facets[m.cell][m.local] = Some(idx);
        }
        self.facets.push(f);
    }

    pub fn n_cells(&self) -> usize {
        self.base.n_triangles() * self.n_layers
    }

    pub fn dz(&self) -> f64 {
        self.lz / self.n_layers as f64
    }

    /// (triangle, layer) of a cell.
    pub fn cell_location(&self, cell: usize) -> (usize, usize) {
        let ntri = self.base.n_triangles();
        (cell % ntri, cell / ntri)
    }

    pub fn cell_geometry(&self, cell: usize) -> CellGeometry {
        let (t, layer) = self.cell_location(cell);
        let [a, b, c] = self.base.triangles[t];
        let (p0, p1, p2) = (self.base.vertices[a], self.base.vertices[b], self.base.vertices[c]);
        let jac = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
        let det2 = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let inv_jac = [
            [jac[1][1] / det2, -jac[0][1] / det2],
            [-jac[1][0] / det2, jac[0][0] / det2],
        ];
        let dz = self.dz();
        CellGeometry {
            v0: p0,
            jac,
            inv_jac,
            det2,
            z0: layer as f64 * dz,
            dz,
        }
    }

    pub fn cell_volume(&self, cell: usize) -> f64 {
        self.cell_geometry(cell).volume()
    }

    /// Physical corners of a local facet of a cell, in the cell's own frame.
    pub fn local_facet_vertices(&self, cell: usize, local: usize) -> Vec<Point3> {
        let (t, layer) = self.cell_location(cell);
        let tri = self.base.triangles[t];
        let dz = self.dz();
        let (z0, z1) = (layer as f64 * dz, (layer + 1) as f64 * dz);
        let lift = |v: usize, z: f64| {
            let p = self.base.vertices[v];
            [p[0], p[1], z]
        };
        match local {
            0 => tri.iter().map(|&v| lift(v, z0)).collect(),
            1 => tri.iter().map(|&v| lift(v, z1)).collect(),
            _ => {
                let [a, b] = local_edge_vertices(&tri, local - 2);
                alloc::vec![lift(a, z0), lift(b, z0), lift(b, z1), lift(a, z1)]
            }
        }
    }

    pub fn interior_facets(&self) -> impl Iterator<Item = (usize, &Facet)> {
        self.facets.iter().enumerate().filter(|(_, f)| !f.is_boundary())
    }

    pub fn boundary_facets(&self) -> impl Iterator<Item = (usize, &Facet)> {
        self.facets.iter().enumerate().filter(|(_, f)| f.is_boundary())
    }

    /// Sorted neighbour list of every cell including the cell itself.
    pub fn cell_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<Vec<usize>> = (0..self.n_cells()).map(|c| alloc::vec![c]).collect();
        for (_, f) in self.interior_facets() {
            let m = f.minus.expect("interior facet").cell;
            adj[f.plus.cell].push(m);
            adj[m].push(f.plus.cell);
        }
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
        }
        adj
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn min_area(m: &BaseMesh2d) -> f64 {
        (0..m.n_triangles()).map(|t| m.triangle_area(t)).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn regular_grid_counts_and_areas() {
        let m = build_base_mesh(7, 1.0, 0.0, 0).unwrap();
        assert_eq!(m.n_triangles(), 98);
        assert_eq!(m.vertices.len(), 64);
        let dx = 1.0 / 7.0;
        for t in 0..98 {
            assert!((m.triangle_area(t) - dx * dx / 2.0).abs() < 1e-15);
        }
        assert_eq!(m.boundary_edges.len(), 28);
    }

    #[test]
    fn perturbed_mesh_keeps_boundary_and_positivity() {
        let m = build_base_mesh(7, 1.0, 0.06, 0).unwrap();
        assert_eq!(m.n_triangles(), 98);
        assert!(min_area(&m) > 0.0);
        for e in &m.boundary_edges {
            for &v in &e.vertices {
                assert!(m.is_boundary_vertex(v));
            }
        }
        let regular = build_base_mesh(7, 1.0, 0.0, 0).unwrap();
        let moved = m.vertices.iter().zip(&regular.vertices).filter(|(a, b)| a != b).count();
        assert_eq!(moved, 36);
    }

    #[test]
    fn extreme_perturbation_stays_valid_for_all_seeds() {
        for seed in 0..100 {
            let m = build_base_mesh(2, 1.0, 0.49, seed).unwrap();
            assert!(min_area(&m) > 0.0, "seed {seed}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_base_mesh(1, 1.0, 0.0, 0).is_err());
        assert!(build_base_mesh(4, 1.0, 0.5, 0).is_err());
        let base = build_base_mesh(2, 1.0, 0.0, 0).unwrap();
        assert!(extrude(&base, 1, 1.0, true).is_err());
    }

    #[test]
    fn refinement_counts_and_nesting() {
        let m0 = build_base_mesh(7, 1.0, 0.06, 3).unwrap();
        let m1 = refine(&m0);
        let m2 = refine(&m1);
        assert_eq!(m1.n_triangles(), 392);
        assert_eq!(m2.n_triangles(), 1568);
        assert_eq!(&m1.vertices[..m0.vertices.len()], &m0.vertices[..]);
        let total: f64 = (0..m2.n_triangles()).map(|t| m2.triangle_area(t)).sum();
        assert!((total - 1.0).abs() < 1e-13);
        assert!(min_area(&m2) > 0.0);
    }

    #[test]
    fn edge_sharing() {
        let m = refine(&build_base_mesh(3, 1.0, 0.1, 1).unwrap());
        let mut count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for tri in &m.triangles {
            for e in 0..3 {
                let [a, b] = local_edge_vertices(tri, e);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let boundary = count.values().filter(|&&c| c == 1).count();
        assert!(count.values().all(|&c| c == 1 || c == 2));
        assert_eq!(boundary, m.boundary_edges.len());
        assert_eq!(boundary, 4 * 6);
    }

    #[test]
    fn extrusion_counts() {
        let base = build_base_mesh(7, 1.0, 0.06, 0).unwrap();
        let m = extrude(&base, 2, 5.0, true).unwrap();
        assert_eq!(m.n_cells(), 196);
        assert!(m.facets.iter().all(|f| f.area > 0.0 && f.h_e > 0.0));
        assert!(m
            .facets
            .iter()
            .filter(|f| matches!(f.kind, FacetKind::Horizontal { .. }))
            .all(|f| !f.is_boundary()));
        assert!(m.cell_facets.iter().all(|cf| cf.iter().all(Option::is_some)));

        let open = extrude(&base, 2, 5.0, false).unwrap();
        let horizontal_boundary = open
            .boundary_facets()
            .filter(|(_, f)| matches!(f.kind, FacetKind::Horizontal { .. }))
            .count();
        assert_eq!(horizontal_boundary, 2 * 98);

        let fine = refine(&refine(&base));
        assert_eq!(extrude(&fine, 8, 7.5, false).unwrap().n_cells(), 12544);
    }

    #[test]
    fn volumes_sum_to_domain() {
        let base = refine(&build_base_mesh(7, 1.0, 0.06, 0).unwrap());
        let m = extrude(&base, 4, 5.0, true).unwrap();
        let total: f64 = (0..m.n_cells()).map(|c| m.cell_volume(c)).sum();
        assert!((total - 5.0).abs() < 5e-12);
    }

    #[test]
    fn facet_vertices_agree_from_both_sides() {
        let base = build_base_mesh(4, 1.0, 0.2, 9).unwrap();
        let m = extrude(&base, 2, 5.0, true).unwrap();
        for (_, f) in m.interior_facets() {
            let minus = f.minus.unwrap();
            let mut a = m.local_facet_vertices(f.plus.cell, f.plus.local);
            let mut b = m.local_facet_vertices(minus.cell, minus.local);
            for p in a.iter_mut().chain(b.iter_mut()) {
                p[2] = p[2].rem_euclid(m.lz);
            }
            let key = |p: &Point3| (p[0].to_bits(), p[1].to_bits(), p[2].to_bits());
            a.sort_by_key(key);
            b.sort_by_key(key);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn normals_close_every_cell() {
        let base = build_base_mesh(4, 1.0, 0.2, 2).unwrap();
        for m in [extrude(&base, 3, 2.0, false).unwrap(), extrude_planar(&base)] {
            let mut sum = alloc::vec![[0.0f64; 3]; m.n_cells()];
            for f in &m.facets {
                for k in 0..3 {
                    sum[f.plus.cell][k] += f.normal[k] * f.area;
                    if let Some(mi) = f.minus {
                        sum[mi.cell][k] -= f.normal[k] * f.area;
                    }
                }
            }
            for (c, s) in sum.iter().enumerate() {
                let (t, _) = m.cell_location(c);
                let tol = 1e-14 * (1.0 + m.base.triangle_area(t).sqrt());
                // Planar cells have open top and bottom; only x, y must close.
                let kmax = if m.planar { 2 } else { 3 };
                for v in s.iter().take(kmax) {
                    assert!(v.abs() < tol, "cell {c}: {s:?}");
                }
            }
        }
    }

    #[test]
    fn boundary_h_e_halves_under_refinement() {
        let base = build_base_mesh(4, 1.0, 0.0, 0).unwrap();
        let h = |b: &BaseMesh2d| {
            let m = extrude(b, 1, 1.0, false).unwrap();
            m.facets
                .iter()
                .filter(|f| matches!(f.kind, FacetKind::Vertical { .. }) && f.is_boundary())
                .map(|f| f.h_e)
                .fold(0.0, f64::max)
        };
        let (h0, h1) = (h(&base), h(&refine(&base)));
        assert!((h0 / h1 - 2.0).abs() < 1e-12);
    }
}
