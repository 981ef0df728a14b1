use std::collections::BTreeSet;

use super::basis::{ElementKind, P2_LOCAL_EDGES};
use crate::mesh::{sorted_edge, Mesh};

/// Global numbering of a Lagrange space on a mesh.
///
/// Vertex DOFs come first in vertex order, so vertex `v` is DOF `v` for both
/// P1 and P2. P2 edge DOFs follow, ordered by their sorted endpoint pair.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub kind: ElementKind,
    pub n_dofs: usize,
    /// Flat `n_triangles × kind.n_local()` array.
    pub element_dofs: Vec<usize>,
    pub dof_coords: Vec<[f64; 2]>,
    /// Sorted.
    pub boundary_dofs: Vec<usize>,
    pub is_boundary: Vec<bool>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, kind: ElementKind) -> Self {
        let nv = mesh.n_vertices();
        let nl = kind.n_local();
        let mut element_dofs = Vec::with_capacity(mesh.n_triangles() * nl);
        let mut dof_coords = mesh.vertices.clone();

        let mut boundary: BTreeSet<usize> = BTreeSet::new();
        for e in &mesh.boundary_edges {
            boundary.extend(e.vertices);
        }

        match kind {
            ElementKind::P1 => {
                for t in &mesh.triangles {
                    element_dofs.extend_from_slice(t);
                }
            }
            ElementKind::P2 => {
                let edges = mesh.edge_map();
                // BTreeMap iteration is sorted by endpoint pair.
                let mut rank = std::collections::HashMap::with_capacity(edges.len());
                for (k, (edge, _)) in edges.iter().enumerate() {
                    rank.insert(*edge, nv + k);
                    let [a, b] = edge.map(|v| mesh.vertices[v]);
                    dof_coords.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
                }
                for t in &mesh.triangles {
                    element_dofs.extend_from_slice(t);
                    for [i, j] in P2_LOCAL_EDGES {
                        element_dofs.push(rank[&sorted_edge(t[i], t[j])]);
                    }
                }
                for e in &mesh.boundary_edges {
                    if let Some(&d) = rank.get(&sorted_edge(e.vertices[0], e.vertices[1])) {
                        boundary.insert(d);
                    }
                }
            }
        }

        let n_dofs = dof_coords.len();
        let mut is_boundary = vec![false; n_dofs];
        for &d in &boundary {
            is_boundary[d] = true;
        }
        Self { kind, n_dofs, element_dofs, dof_coords, boundary_dofs: boundary.into_iter().collect(), is_boundary }
    }

    pub fn n_local(&self) -> usize {
        self.kind.n_local()
    }

    pub fn n_elements(&self) -> usize {
        self.element_dofs.len() / self.n_local()
    }

    pub fn element(&self, t: usize) -> &[usize] {
        let nl = self.n_local();
        &self.element_dofs[t * nl..(t + 1) * nl]
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.dof_coords.iter().map(|p| f(p[0], p[1])).collect()
    }
}

/// Affine map data of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub origin: [f64; 2],
    /// Columns are the images of the reference axes.
    pub jac: [[f64; 2]; 2],
    /// `J^{-T}`, maps reference gradients to physical ones.
    pub jinv_t: [[f64; 2]; 2],
    pub area: f64,
}

impl ElementGeometry {
    pub fn new(mesh: &Mesh, t: usize) -> Self {
        let [a, b, c] = mesh.triangles[t].map(|v| mesh.vertices[v]);
        let jac = [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let jinv_t = [[jac[1][1] / det, -jac[1][0] / det], [-jac[0][1] / det, jac[0][0] / det]];
        Self { origin: a, jac, jinv_t, area: 0.5 * det }
    }

    pub fn all(mesh: &Mesh) -> Vec<Self> {
        (0..mesh.n_triangles()).map(|t| Self::new(mesh, t)).collect()
    }

    #[inline]
    pub fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.jinv_t[0][0] * g[0] + self.jinv_t[0][1] * g[1],
            self.jinv_t[1][0] * g[0] + self.jinv_t[1][1] * g[1],
        ]
    }

    #[inline]
    pub fn map(&self, xi: f64, eta: f64) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * xi + self.jac[0][1] * eta,
            self.origin[1] + self.jac[1][0] * xi + self.jac[1][1] * eta,
        ]
    }

    /// Physical weight for a reference weight (`2 · area · w`).
    #[inline]
    pub fn weight(&self, w: f64) -> f64 {
        2.0 * self.area * w
    }
}
