//! Conforming triangulations of rectangles with tagged boundary sides.

use std::collections::BTreeMap;

use thiserror::Error;

/// Axis-aligned rectangle `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub const fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self { x_min, x_max, y_min, y_max }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn is_valid(&self) -> bool {
        self.x_min.is_finite()
            && self.x_max.is_finite()
            && self.y_min.is_finite()
            && self.y_max.is_finite()
            && self.x_max > self.x_min
            && self.y_max > self.y_min
    }
}

impl Default for Rect {
    /// The square `(-1, 1)²`.
    fn default() -> Self {
        Self::new(-1.0, 1.0, -1.0, 1.0)
    }
}

/// Side of the rectangle an edge lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Bottom = 1,
    Right = 2,
    Top = 3,
    Left = 4,
}

impl Side {
    pub fn marker(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub side: Side,
}

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("number of cells per side must be at least 1")]
    ZeroCells,
    #[error("degenerate or inverted bounds {0:?}")]
    BadBounds(Rect),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshViolation {
    /// Triangle with signed area ≤ 0 (clockwise or collapsed).
    NonPositiveArea { triangle: usize, area: f64 },
    /// Triangle referencing a vertex index out of range.
    BadVertexIndex { triangle: usize, vertex: usize },
    /// An edge whose triangle count does not match its boundary tagging.
    NonConforming { edge: [usize; 2], triangles: usize, tagged: bool },
    /// A tagged boundary edge that does not lie on the side its marker names.
    OffBoundary { edge: [usize; 2], side: Side },
    /// Tagged boundary does not cover the rectangle perimeter.
    BoundaryLength { expected: f64, found: f64 },
    /// Triangle areas do not add up to the rectangle area.
    AreaMismatch { expected: f64, found: f64 },
}

/// Triangular mesh. Triangles are counter-clockwise.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub bounds: Rect,
}

impl Mesh {
    /// Uniform `nx × nx` grid of `bounds`, each cell split along its
    /// lower-left to upper-right diagonal.
    ///
    /// Vertex `(i, j)` (column `i`, row `j`) has index `j * (nx + 1) + i`.
    pub fn structured_rect(nx: usize, bounds: Rect) -> Result<Self, MeshError> {
        if nx == 0 {
            return Err(MeshError::ZeroCells);
        }
        if !bounds.is_valid() {
            return Err(MeshError::BadBounds(bounds));
        }
        let np = nx + 1;
        let idx = |i: usize, j: usize| j * np + i;
        let coord = |i: usize, lo: f64, hi: f64| {
            if i == nx {
                hi
            } else {
                lo + (hi - lo) * (i as f64) / (nx as f64)
            }
        };

        let mut vertices = Vec::with_capacity(np * np);
        for j in 0..np {
            let y = coord(j, bounds.y_min, bounds.y_max);
            for i in 0..np {
                vertices.push([coord(i, bounds.x_min, bounds.x_max), y]);
            }
        }

        let mut triangles = Vec::with_capacity(2 * nx * nx);
        for j in 0..nx {
            for i in 0..nx {
                let v00 = idx(i, j);
                let v10 = idx(i + 1, j);
                let v01 = idx(i, j + 1);
                let v11 = idx(i + 1, j + 1);
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }

        // Counter-clockwise walk around the rectangle.
        let mut boundary_edges = Vec::with_capacity(4 * nx);
        for i in 0..nx {
            boundary_edges.push(BoundaryEdge { vertices: [idx(i, 0), idx(i + 1, 0)], side: Side::Bottom });
        }
        for j in 0..nx {
            boundary_edges.push(BoundaryEdge { vertices: [idx(nx, j), idx(nx, j + 1)], side: Side::Right });
        }
        for i in (0..nx).rev() {
            boundary_edges.push(BoundaryEdge { vertices: [idx(i + 1, nx), idx(i, nx)], side: Side::Top });
        }
        for j in (0..nx).rev() {
            boundary_edges.push(BoundaryEdge { vertices: [idx(0, j + 1), idx(0, j)], side: Side::Left });
        }

        Ok(Self { vertices, triangles, boundary_edges, bounds })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Largest axis-aligned extent of any edge. For the structured split this
    /// is the cell width `(x_max - x_min) / nx`.
    pub fn h(&self) -> f64 {
        let mut h: f64 = 0.0;
        for t in &self.triangles {
            for k in 0..3 {
                let a = self.vertices[t[k]];
                let b = self.vertices[t[(k + 1) % 3]];
                h = h.max((b[0] - a[0]).abs().max((b[1] - a[1]).abs()));
            }
        }
        h
    }

    pub fn signed_area(&self, triangle: usize) -> f64 {
        let [a, b, c] = self.triangles[triangle].map(|v| self.vertices[v]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.signed_area(t)).sum()
    }

    /// Undirected edges with the triangles that use them, keyed by sorted
    /// endpoint pair.
    pub fn edge_map(&self) -> BTreeMap<[usize; 2], Vec<usize>> {
        let mut edges: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
        for (ti, t) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                edges.entry(sorted_edge(t[k], t[(k + 1) % 3])).or_default().push(ti);
            }
        }
        edges
    }

    /// Checks every mesh invariant; an empty list means the mesh is valid.
    pub fn validate(&self) -> Vec<MeshViolation> {
        let mut out = Vec::new();
        let nv = self.n_vertices();
        let mut indices_ok = true;
        for (ti, t) in self.triangles.iter().enumerate() {
            if let Some(&v) = t.iter().find(|&&v| v >= nv) {
                out.push(MeshViolation::BadVertexIndex { triangle: ti, vertex: v });
                indices_ok = false;
            }
        }
        if !indices_ok {
            return out;
        }

        for ti in 0..self.n_triangles() {
            let area = self.signed_area(ti);
            if area <= 0.0 || !area.is_finite() {
                out.push(MeshViolation::NonPositiveArea { triangle: ti, area });
            }
        }

        let edges = self.edge_map();
        let tagged: BTreeMap<[usize; 2], Side> = self
            .boundary_edges
            .iter()
            .map(|e| (sorted_edge(e.vertices[0], e.vertices[1]), e.side))
            .collect();
        let n_before = out.len();
        for (edge, tris) in &edges {
            let is_tagged = tagged.contains_key(edge);
            let ok = matches!((tris.len(), is_tagged), (1, true) | (2, false));
            if !ok {
                out.push(MeshViolation::NonConforming { edge: *edge, triangles: tris.len(), tagged: is_tagged });
            }
        }
        for edge in tagged.keys() {
            if !edges.contains_key(edge) {
                out.push(MeshViolation::NonConforming { edge: *edge, triangles: 0, tagged: true });
            }
        }
        let conforming = out.len() == n_before;

        let b = self.bounds;
        let scale = b.width().max(b.height());
        let tol = 1e-12 * scale;
        let on_side = |p: [f64; 2], side: Side| match side {
            Side::Bottom => (p[1] - b.y_min).abs() <= tol,
            Side::Right => (p[0] - b.x_max).abs() <= tol,
            Side::Top => (p[1] - b.y_max).abs() <= tol,
            Side::Left => (p[0] - b.x_min).abs() <= tol,
        };
        let mut length = 0.0;
        for e in &self.boundary_edges {
            let [p, q] = e.vertices.map(|v| self.vertices.get(v).copied().unwrap_or([f64::NAN; 2]));
            if !(on_side(p, e.side) && on_side(q, e.side)) {
                out.push(MeshViolation::OffBoundary { edge: e.vertices, side: e.side });
            }
            length += ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
        }

        // Coverage follows from conformity plus side placement; only report
        // it separately when the topology itself is sound.
        if conforming {
            let perimeter = 2.0 * (b.width() + b.height());
            if (length - perimeter).abs() > 1e-12 * perimeter {
                out.push(MeshViolation::BoundaryLength { expected: perimeter, found: length });
            }
            if out.is_empty() {
                let area = self.total_area();
                if (area - b.area()).abs() > 1e-13 * b.area() {
                    out.push(MeshViolation::AreaMismatch { expected: b.area(), found: area });
                }
            }
        }
        out
    }
}

pub(crate) fn sorted_edge(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_split() {
        let m = Mesh::structured_rect(1, Rect::default()).unwrap();
        assert_eq!(m.n_vertices(), 4);
        assert_eq!(m.n_triangles(), 2);
        assert_eq!(m.boundary_edges.len(), 4);
        assert!(m.validate().is_empty());
    }

    #[test]
    fn default_resolution_counts() {
        let m = Mesh::structured_rect(32, Rect::default()).unwrap();
        assert_eq!(m.n_vertices(), 1089);
        assert_eq!(m.n_triangles(), 2048);
        assert_eq!(m.h(), 1.0 / 16.0);
        assert!(m.validate().is_empty());
    }

    #[test]
    fn unit_square_area() {
        let m = Mesh::structured_rect(2, Rect::new(0.0, 1.0, 0.0, 1.0)).unwrap();
        assert!((m.total_area() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert_eq!(Mesh::structured_rect(0, Rect::default()).unwrap_err(), MeshError::ZeroCells);
        let inverted = Rect::new(1.0, -1.0, -1.0, 1.0);
        assert_eq!(Mesh::structured_rect(4, inverted).unwrap_err(), MeshError::BadBounds(inverted));
    }

    #[test]
    fn flipped_triangle_is_reported_once() {
        let mut m = Mesh::structured_rect(3, Rect::default()).unwrap();
        m.triangles[4].swap(1, 2);
        let v = m.validate();
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(matches!(v[0], MeshViolation::NonPositiveArea { triangle: 4, .. }));
    }

    #[test]
    fn dangling_edge_is_reported_once() {
        let mut m = Mesh::structured_rect(3, Rect::default()).unwrap();
        // Bottom-side edge between two vertices that are not neighbours.
        m.boundary_edges.push(BoundaryEdge { vertices: [0, 2], side: Side::Bottom });
        let v = m.validate();
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(matches!(v[0], MeshViolation::NonConforming { triangles: 0, tagged: true, .. }));
    }

    #[test]
    fn untagged_boundary_edge_is_nonconforming() {
        let mut m = Mesh::structured_rect(2, Rect::default()).unwrap();
        m.boundary_edges.pop();
        let v = m.validate();
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(matches!(v[0], MeshViolation::NonConforming { triangles: 1, tagged: false, .. }));
    }

    #[test]
    fn rectangular_bounds() {
        let b = Rect::new(0.0, 3.0, -0.5, 0.5);
        let m = Mesh::structured_rect(5, b).unwrap();
        assert!(m.validate().is_empty());
        assert!((m.total_area() - 3.0).abs() <= 1e-13 * 3.0);
        let sides: Vec<u8> = m.boundary_edges.iter().map(|e| e.side.marker()).collect();
        for s in 1..=4u8 {
            assert_eq!(sides.iter().filter(|&&x| x == s).count(), 5);
        }
    }
}
