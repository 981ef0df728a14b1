//! Nodal Lagrange bases on the reference triangle.
//!
//! Local numbering: vertices 0, 1, 2, then (P2 only) edge midpoints
//! 3 = (0,1), 4 = (1,2), 5 = (2,0).

use super::quadrature::QuadratureRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    P1,
    P2,
}

impl ElementKind {
    pub const fn n_local(self) -> usize {
        match self {
            ElementKind::P1 => 3,
            ElementKind::P2 => 6,
        }
    }
}

/// Local vertex pairs of the P2 edge DOFs 3, 4, 5.
pub const P2_LOCAL_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

const GRAD_LAMBDA: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

/// Values and reference gradients `(∂/∂ξ, ∂/∂η)` of every local basis
/// function at barycentric point `bary`.
pub fn eval_basis(kind: ElementKind, bary: [f64; 3]) -> (Vec<f64>, Vec<[f64; 2]>) {
    let mut values = [0.0; 6];
    let mut grads = [[0.0; 2]; 6];
    eval_into(kind, bary, &mut values, &mut grads);
    let n = kind.n_local();
    (values[..n].to_vec(), grads[..n].to_vec())
}

pub(crate) fn eval_into(kind: ElementKind, l: [f64; 3], values: &mut [f64; 6], grads: &mut [[f64; 2]; 6]) {
    match kind {
        ElementKind::P1 => {
            values[..3].copy_from_slice(&l);
            grads[..3].copy_from_slice(&GRAD_LAMBDA);
        }
        ElementKind::P2 => {
            for i in 0..3 {
                values[i] = l[i] * (2.0 * l[i] - 1.0);
                let s = 4.0 * l[i] - 1.0;
                grads[i] = [s * GRAD_LAMBDA[i][0], s * GRAD_LAMBDA[i][1]];
            }
            for (k, [i, j]) in P2_LOCAL_EDGES.into_iter().enumerate() {
                values[3 + k] = 4.0 * l[i] * l[j];
                grads[3 + k] = [
                    4.0 * (l[j] * GRAD_LAMBDA[i][0] + l[i] * GRAD_LAMBDA[j][0]),
                    4.0 * (l[j] * GRAD_LAMBDA[i][1] + l[i] * GRAD_LAMBDA[j][1]),
                ];
            }
        }
    }
}

/// Basis values and reference gradients at every point of a rule.
#[derive(Debug, Clone)]
pub struct BasisTable {
    pub kind: ElementKind,
    /// `values[q][i]`
    pub values: Vec<[f64; 6]>,
    /// `grads[q][i]`, reference coordinates.
    pub grads: Vec<[[f64; 2]; 6]>,
}

impl BasisTable {
    pub fn new(kind: ElementKind, rule: &QuadratureRule) -> Self {
        let mut values = Vec::with_capacity(rule.len());
        let mut grads = Vec::with_capacity(rule.len());
        for &p in &rule.points {
            let mut v = [0.0; 6];
            let mut g = [[0.0; 2]; 6];
            eval_into(kind, p, &mut v, &mut g);
            values.push(v);
            grads.push(g);
        }
        Self { kind, values, grads }
    }
}
