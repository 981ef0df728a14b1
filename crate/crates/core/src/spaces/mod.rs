//! Reference elements, quadrature and degree-of-freedom maps for the
//! P2/P1 Taylor–Hood velocity–pressure pair and the P1/P1 layer pair.

pub mod basis;
pub mod dofmap;
pub mod quadrature;

pub use basis::{eval_basis, BasisTable, ElementKind};
pub use dofmap::{DofMap, ElementGeometry};
pub use quadrature::{QuadratureRule, UnsupportedDegree};

use crate::mesh::Mesh;

/// Default rule degree; exact for every form the scheme assembles.
pub const DEFAULT_QUADRATURE_DEGREE: usize = 6;

/// A mesh together with the velocity (P2) and scalar (P1) spaces, the
/// quadrature rule and the per-element data every assembly loop needs.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub velocity: DofMap,
    pub scalar: DofMap,
    pub rule: QuadratureRule,
    pub p2: BasisTable,
    pub p1: BasisTable,
    pub geometry: Vec<ElementGeometry>,
    /// Physical gradients of the three P1 basis functions, per element.
    pub p1_grads: Vec<[[f64; 2]; 3]>,
    /// `∫ q_i` for every P1 basis function.
    pub p1_integrals: Vec<f64>,
}

impl Discretization {
    pub fn new(mesh: Mesh) -> Self {
        Self::with_degree(mesh, DEFAULT_QUADRATURE_DEGREE).expect("default degree is supported")
    }

    pub fn with_degree(mesh: Mesh, degree: usize) -> Result<Self, UnsupportedDegree> {
        let rule = QuadratureRule::new(degree)?;
        let velocity = DofMap::new(&mesh, ElementKind::P2);
        let scalar = DofMap::new(&mesh, ElementKind::P1);
        let p2 = BasisTable::new(ElementKind::P2, &rule);
        let p1 = BasisTable::new(ElementKind::P1, &rule);
        let geometry = ElementGeometry::all(&mesh);
        let p1_grads = geometry
            .iter()
            .map(|g| {
                let (_, rg) = eval_basis(ElementKind::P1, [1.0 / 3.0; 3]);
                [g.grad(rg[0]), g.grad(rg[1]), g.grad(rg[2])]
            })
            .collect();
        let mut p1_integrals = vec![0.0; scalar.n_dofs];
        for (t, g) in geometry.iter().enumerate() {
            for &i in scalar.element(t) {
                p1_integrals[i] += g.area / 3.0;
            }
        }
        Ok(Self { mesh, velocity, scalar, rule, p2, p1, geometry, p1_grads, p1_integrals })
    }

    pub fn n_velocity(&self) -> usize {
        self.velocity.n_dofs
    }

    pub fn n_scalar(&self) -> usize {
        self.scalar.n_dofs
    }

    pub fn n_elements(&self) -> usize {
        self.geometry.len()
    }

    /// Gradient of a P1 field on element `t` (constant there).
    #[inline]
    pub fn p1_gradient(&self, t: usize, coef: &[f64]) -> [f64; 2] {
        let g = &self.p1_grads[t];
        let d = self.scalar.element(t);
        [
            g[0][0] * coef[d[0]] + g[1][0] * coef[d[1]] + g[2][0] * coef[d[2]],
            g[0][1] * coef[d[0]] + g[1][1] * coef[d[1]] + g[2][1] * coef[d[2]],
        ]
    }

    /// Physical gradients of the six P2 basis functions at point `q` of element `t`.
    #[inline]
    pub fn p2_gradients(&self, t: usize, q: usize) -> [[f64; 2]; 6] {
        let g = &self.geometry[t];
        self.p2.grads[q].map(|r| g.grad(r))
    }

    /// Value of a P2 velocity (components stored as `[x-block, y-block]`) at
    /// point `q` of element `t`.
    #[inline]
    pub fn velocity_at(&self, t: usize, q: usize, u: &[f64]) -> [f64; 2] {
        let n = self.n_velocity();
        let d = self.velocity.element(t);
        let v = &self.p2.values[q];
        let mut out = [0.0; 2];
        for i in 0..6 {
            out[0] += v[i] * u[d[i]];
            out[1] += v[i] * u[n + d[i]];
        }
        out
    }

    /// Value of a P1 field at point `q` of element `t`.
    #[inline]
    pub fn scalar_at(&self, t: usize, q: usize, c: &[f64]) -> f64 {
        let d = self.scalar.element(t);
        let v = &self.p1.values[q];
        v[0] * c[d[0]] + v[1] * c[d[1]] + v[2] * c[d[2]]
    }

    /// `∫ c` for a P1 field.
    pub fn integrate_scalar(&self, c: &[f64]) -> f64 {
        self.p1_integrals.iter().zip(c).map(|(w, v)| w * v).sum()
    }
}
