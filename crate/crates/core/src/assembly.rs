//! Finite-element operators and the coupled linear system of one time step.
//!
//! Unknown ordering of the step system is `[ux, uy, p, φ, ψ, r]`, where `r`
//! is a scalar multiplier enforcing `∫ p = 0`. Velocity boundary rows are
//! identity rows and velocity boundary columns are dropped, which imposes
//! the no-slip condition.

use crate::model::{Params, State, Vec2};
use crate::sparse::{solve_direct, CooBuilder, CsrMatrix, SparseError};
use crate::spaces::{Discretization, ElementKind};

/// Offsets of each unknown block in the step system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockLayout {
    pub n_vel: usize,
    pub n_scalar: usize,
    pub ux: usize,
    pub uy: usize,
    pub p: usize,
    pub phi: usize,
    pub psi: usize,
    pub mult: usize,
    pub total: usize,
}

impl BlockLayout {
    pub fn new(disc: &Discretization) -> Self {
        let n_vel = disc.n_velocity();
        let n_scalar = disc.n_scalar();
        let ux = 0;
        let uy = n_vel;
        let p = 2 * n_vel;
        let phi = p + n_scalar;
        let psi = phi + n_scalar;
        let mult = psi + n_scalar;
        Self { n_vel, n_scalar, ux, uy, p, phi, psi, mult, total: mult + 1 }
    }

    pub fn velocity<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[self.ux..self.p]
    }

    pub fn pressure<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[self.p..self.phi]
    }

    pub fn phi<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[self.phi..self.psi]
    }

    pub fn psi<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[self.psi..self.mult]
    }
}

/// Lagged fields that make the step linear: `ũ` (P2, both components) and
/// `φ̃` (P1).
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolants {
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct StepSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

/// Symmetric gradient stored as `[xx, xy, yy]`.
type Sym = [f64; 3];

#[inline]
fn sym_grad_basis(comp: usize, g: [f64; 2]) -> Sym {
    if comp == 0 {
        [g[0], 0.5 * g[1], 0.0]
    } else {
        [0.0, 0.5 * g[0], g[1]]
    }
}

#[inline]
fn sym_apply(d: Sym, n: Vec2) -> Vec2 {
    [d[0] * n[0] + d[1] * n[1], d[1] * n[0] + d[2] * n[1]]
}

/// `μ1 (nᵀD₁n)(nᵀD₂n) + μ4 D₁:D₂ + 2μ5 (D₁n)·(D₂n)`
#[inline]
pub fn sigma_d_pair(params: &Params, n: Vec2, d1: Sym, d2: Sym) -> f64 {
    let a = sym_apply(d1, n);
    let b = sym_apply(d2, n);
    let nn1 = a[0] * n[0] + a[1] * n[1];
    let nn2 = b[0] * n[0] + b[1] * n[1];
    let dd = d1[0] * d2[0] + 2.0 * d1[1] * d2[1] + d1[2] * d2[2];
    params.mu1 * nn1 * nn2 + params.mu4 * dd + 2.0 * params.mu5 * (a[0] * b[0] + a[1] * b[1])
}

/// Symmetric gradient of a P2 velocity at point `q` of element `t`.
pub fn velocity_sym_grad(disc: &Discretization, t: usize, q: usize, u: &[f64]) -> Sym {
    let nv = disc.n_velocity();
    let dofs = disc.velocity.element(t);
    let g = disc.p2_gradients(t, q);
    let mut gu = [[0.0; 2]; 2];
    for i in 0..6 {
        for c in 0..2 {
            let coef = u[c * nv + dofs[i]];
            gu[c][0] += coef * g[i][0];
            gu[c][1] += coef * g[i][1];
        }
    }
    [gu[0][0], 0.5 * (gu[0][1] + gu[1][0]), gu[1][1]]
}

fn table(disc: &Discretization, kind: ElementKind) -> (&crate::spaces::DofMap, &crate::spaces::BasisTable) {
    match kind {
        ElementKind::P1 => (&disc.scalar, &disc.p1),
        ElementKind::P2 => (&disc.velocity, &disc.p2),
    }
}

/// Scalar mass matrix `∫ N_i N_j` of the given space.
pub fn assemble_mass(disc: &Discretization, kind: ElementKind) -> CsrMatrix {
    let (dm, tab) = table(disc, kind);
    let nl = kind.n_local();
    let mut coo = CooBuilder::with_capacity(dm.n_dofs, dm.n_dofs, disc.n_elements() * nl * nl);
    for t in 0..disc.n_elements() {
        let g = &disc.geometry[t];
        let dofs = dm.element(t);
        let mut loc = [[0.0; 6]; 6];
        for (q, &w) in disc.rule.weights.iter().enumerate() {
            let w = g.weight(w);
            let v = &tab.values[q];
            for i in 0..nl {
                for j in 0..nl {
                    loc[i][j] += w * v[i] * v[j];
                }
            }
        }
        for i in 0..nl {
            for j in 0..nl {
                coo.push(dofs[i], dofs[j], loc[i][j]);
            }
        }
    }
    coo.finalize()
}

/// Scalar stiffness matrix `∫ ∇N_i·∇N_j` of the given space.
pub fn assemble_stiffness(disc: &Discretization, kind: ElementKind) -> CsrMatrix {
    let (dm, tab) = table(disc, kind);
    let nl = kind.n_local();
    let mut coo = CooBuilder::with_capacity(dm.n_dofs, dm.n_dofs, disc.n_elements() * nl * nl);
    for t in 0..disc.n_elements() {
        let g = &disc.geometry[t];
        let dofs = dm.element(t);
        let mut loc = [[0.0; 6]; 6];
        for (q, &w) in disc.rule.weights.iter().enumerate() {
            let w = g.weight(w);
            let dg = tab.grads[q].map(|r| g.grad(r));
            for i in 0..nl {
                for j in 0..nl {
                    loc[i][j] += w * (dg[i][0] * dg[j][0] + dg[i][1] * dg[j][1]);
                }
            }
        }
        for i in 0..nl {
            for j in 0..nl {
                coo.push(dofs[i], dofs[j], loc[i][j]);
            }
        }
    }
    coo.finalize()
}

/// Skew-symmetric convection on the vector P2 space:
/// `C[w, v] = ½[((ũ·∇)v, w) - ((ũ·∇)w, v)]`, rows indexed by `w`.
pub fn assemble_convection(disc: &Discretization, u_tilde: &[f64]) -> CsrMatrix {
    let nv = disc.n_velocity();
    let mut coo = CooBuilder::with_capacity(2 * nv, 2 * nv, disc.n_elements() * 72);
    for t in 0..disc.n_elements() {
        let g = &disc.geometry[t];
        let dofs = disc.velocity.element(t);
        let mut loc = [[0.0; 6]; 6];
        for (q, &w) in disc.rule.weights.iter().enumerate() {
            let w = g.weight(w);
            let v = &disc.p2.values[q];
            let dg = disc.p2_gradients(t, q);
            let ut = disc.velocity_at(t, q, u_tilde);
            let adv: [f64; 6] = std::array::from_fn(|i| ut[0] * dg[i][0] + ut[1] * dg[i][1]);
            for i in 0..6 {
                for j in 0..6 {
                    loc[i][j] += 0.5 * w * (adv[j] * v[i] - adv[i] * v[j]);
                }
            }
        }
        for c in 0..2 {
            for i in 0..6 {
                for j in 0..6 {
                    coo.push(c * nv + dofs[i], c * nv + dofs[j], loc[i][j]);
                }
            }
        }
    }
    coo.finalize()
}

/// Anisotropic viscous form `(σ^d(D(v), ∇φ̃), D(w))` on the vector P2 space.
pub fn assemble_sigma_d(disc: &Discretization, params: &Params, phi_tilde: &[f64]) -> CsrMatrix {
    let nv = disc.n_velocity();
    let mut coo = CooBuilder::with_capacity(2 * nv, 2 * nv, disc.n_elements() * 144);
    for t in 0..disc.n_elements() {
        let g = &disc.geometry[t];
        let dofs = disc.velocity.element(t);
        let n = disc.p1_gradient(t, phi_tilde);
        let mut loc = [[0.0; 12]; 12];
        for (q, &w) in disc.rule.weights.iter().enumerate() {
            let w = g.weight(w);
            let dg = disc.p2_gradients(t, q);
            let d: [Sym; 12] = std::array::from_fn(|k| sym_grad_basis(k / 6, dg[k % 6]));
            for i in 0..12 {
                for j in 0..12 {
                    loc[i][j] += w * sigma_d_pair(params, n, d[j], d[i]);
                }
            }
        }
        for i in 0..12 {
            for j in 0..12 {
                coo.push((i / 6) * nv + dofs[i % 6], (j / 6) * nv + dofs[j % 6], loc[i][j]);
            }
        }
    }
    coo.finalize()
}

/// Divergence `B_ij = ∫ q_i ∇·v_j`, P1 rows by vector-P2 columns.
pub fn assemble_divergence(disc: &Discretization) -> CsrMatrix {
    let nv = disc.n_velocity();
    let ns = disc.n_scalar();
    let mut coo = CooBuilder::with_capacity(ns, 2 * nv, disc.n_elements() * 36);
    for t in 0..disc.n_elements() {
        let g = &disc.geometry[t];
        let vd = disc.velocity.element(t);
        let sd = disc.scalar.element(t);
        let mut loc = [[[0.0; 6]; 2]; 3];
        for (q, &w) in disc.rule.weights.iter().enumerate() {
            let w = g.weight(w);
            let m = &disc.p1.values[q];
            let dg = disc.p2_gradients(t, q);
            for i in 0..3 {
                for c in 0..2 {
                    for j in 0..6 {
                        loc[i][c][j] += w * m[i] * dg[j][c];
                    }
                }
            }
        }
        for (i, row) in loc.iter().enumerate() {
            for (c, vals) in row.iter().enumerate() {
                for (j, &v) in vals.iter().enumerate() {
                    coo.push(sd[i], c * nv + vd[j], v);
                }
            }
        }
    }
    coo.finalize()
}

/// `ψ⁰` with `(ψ⁰, ψ̄) = (∇φ⁰, ∇ψ̄)` for all P1 `ψ̄`, the discrete `-Δφ⁰`
/// under the natural boundary condition.
pub fn project_initial_psi(disc: &Discretization, phi: &[f64]) -> Result<Vec<f64>, SparseError> {
    let m = assemble_mass(disc, ElementKind::P1);
    let k = assemble_stiffness(disc, ElementKind::P1);
    let rhs = k.spmv(phi)?;
    if rhs.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; phi.len()]);
    }
    solve_direct(&m, &rhs)
}

// Local unknown offsets within one element: ux 0..6, uy 6..12, p, φ, ψ.
const LP: usize = 12;
const LPHI: usize = 15;
const LPSI: usize = 18;
const NL: usize = 21;
const NONE: u32 = u32::MAX;

/// Assembles step systems on a fixed sparsity pattern.
///
/// The pattern depends only on the mesh, so element-to-value index maps are
/// built once and each step only overwrites values.
#[derive(Debug, Clone)]
pub struct StepAssembler {
    pub layout: BlockLayout,
    pattern: CsrMatrix,
    /// `n_elements × NL × NL` indices into `pattern.values`.
    element_map: Vec<u32>,
    element_rows: Vec<[usize; NL]>,
    dirichlet_diag: Vec<usize>,
    /// Value indices of `(p_i, r)` and `(r, p_i)`.
    mult_col: Vec<usize>,
    mult_row: Vec<usize>,
    is_dirichlet: Vec<bool>,
}

fn local_couples(r: usize, c: usize) -> bool {
    let block = |i: usize| match i {
        0..LP => 0,
        LP..LPHI => 1,
        LPHI..LPSI => 2,
        _ => 3,
    };
    matches!(
        (block(r), block(c)),
        (0, 0) | (0, 1) | (0, 2) | (1, 0) | (2, 0) | (2, 2) | (2, 3) | (3, 2) | (3, 3)
    )
}

impl StepAssembler {
    pub fn new(disc: &Discretization) -> Self {
        let layout = BlockLayout::new(disc);
        let ne = disc.n_elements();
        let mut is_dirichlet = vec![false; layout.total];
        for &d in &disc.velocity.boundary_dofs {
            is_dirichlet[layout.ux + d] = true;
            is_dirichlet[layout.uy + d] = true;
        }
        let element_rows: Vec<[usize; NL]> = (0..ne)
            .map(|t| {
                let vd = disc.velocity.element(t);
                let sd = disc.scalar.element(t);
                std::array::from_fn(|k| match k {
                    0..6 => layout.ux + vd[k],
                    6..LP => layout.uy + vd[k - 6],
                    LP..LPHI => layout.p + sd[k - LP],
                    LPHI..LPSI => layout.phi + sd[k - LPHI],
                    _ => layout.psi + sd[k - LPSI],
                })
            })
            .collect();

        let keep = |r: usize, c: usize| !(is_dirichlet[r] || is_dirichlet[c]);
        let mut coo = CooBuilder::with_capacity(layout.total, layout.total, ne * 300);
        for rows in &element_rows {
            for r in 0..NL {
                for c in 0..NL {
                    if local_couples(r, c) && keep(rows[r], rows[c]) {
                        coo.push(rows[r], rows[c], 0.0);
                    }
                }
            }
        }
        for (g, &d) in is_dirichlet.iter().enumerate() {
            if d {
                coo.push(g, g, 0.0);
            }
        }
        for i in 0..layout.n_scalar {
            coo.push(layout.p + i, layout.mult, 0.0);
            coo.push(layout.mult, layout.p + i, 0.0);
        }
        let pattern = coo.finalize();

        let idx = |r: usize, c: usize| pattern.find(r, c).expect("entry is in the pattern");
        let mut element_map = vec![NONE; ne * NL * NL];
        for (t, rows) in element_rows.iter().enumerate() {
            for r in 0..NL {
                for c in 0..NL {
                    if local_couples(r, c) && keep(rows[r], rows[c]) {
                        element_map[(t * NL + r) * NL + c] = idx(rows[r], rows[c]) as u32;
                    }
                }
            }
        }
        let dirichlet_diag = (0..layout.total).filter(|&g| is_dirichlet[g]).map(|g| idx(g, g)).collect();
        let mult_col = (0..layout.n_scalar).map(|i| idx(layout.p + i, layout.mult)).collect();
        let mult_row = (0..layout.n_scalar).map(|i| idx(layout.mult, layout.p + i)).collect();
        Self { layout, pattern, element_map, element_rows, dirichlet_diag, mult_col, mult_row, is_dirichlet }
    }

    pub fn pattern(&self) -> &CsrMatrix {
        &self.pattern
    }

    pub fn is_dirichlet(&self, row: usize) -> bool {
        self.is_dirichlet[row]
    }

    /// Builds the system for `(uⁿ⁺¹, pⁿ⁺½, φⁿ⁺¹, ψⁿ⁺¹, r)` from level `prev`.
    ///
    /// `phi_frozen` is the iterate at which a nonlinear `f^k` is linearized;
    /// it is ignored by the linear schemes.
    pub fn assemble(
        &self,
        disc: &Discretization,
        params: &Params,
        prev: &State,
        ext: &Extrapolants,
        phi_frozen: &[f64],
    ) -> StepSystem {
        let mut matrix = self.pattern.clone();
        let mut rhs = vec![0.0; self.layout.total];
        self.assemble_into(disc, params, prev, ext, phi_frozen, &mut matrix, &mut rhs);
        StepSystem { matrix, rhs }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn assemble_into(
        &self,
        disc: &Discretization,
        params: &Params,
        prev: &State,
        ext: &Extrapolants,
        phi_frozen: &[f64],
        matrix: &mut CsrMatrix,
        rhs: &mut [f64],
    ) {
        assert!(matrix.same_pattern(&self.pattern), "matrix was not built from this assembler");
        matrix.values.iter_mut().for_each(|v| *v = 0.0);
        rhs.iter_mut().for_each(|v| *v = 0.0);

        let k = params.dt;
        let lg = params.lambda / params.gamma;
        let inv_eps2 = 1.0 / (params.epsilon * params.epsilon);
        let nv = self.layout.n_vel;

        let mut lhs = [[0.0; NL]; NL];
        let mut old = [[0.0; NL]; NL];
        let mut cst = [0.0; NL];

        for t in 0..disc.n_elements() {
            for r in 0..NL {
                lhs[r].fill(0.0);
                old[r].fill(0.0);
            }
            cst.fill(0.0);
            // (X/k)(xⁿ⁺¹ - xⁿ)
            macro_rules! rate {
                ($r:expr, $c:expr, $v:expr) => {{
                    let v = $v / k;
                    lhs[$r][$c] += v;
                    old[$r][$c] += v;
                }};
            }
            // X(xⁿ⁺¹ + xⁿ)/2
            macro_rules! mid {
                ($r:expr, $c:expr, $v:expr) => {{
                    let v = 0.5 * $v;
                    lhs[$r][$c] += v;
                    old[$r][$c] -= v;
                }};
            }

            let geo = &disc.geometry[t];
            let n = disc.p1_gradient(t, &ext.phi);
            let gm = &disc.p1_grads[t];

            for (q, &wq) in disc.rule.weights.iter().enumerate() {
                let w = geo.weight(wq);
                let nvals = &disc.p2.values[q];
                let mvals = &disc.p1.values[q];
                let dg = disc.p2_gradients(t, q);
                let ut = disc.velocity_at(t, q, &ext.u);
                let adv: [f64; 6] = std::array::from_fn(|i| ut[0] * dg[i][0] + ut[1] * dg[i][1]);
                let d: [Sym; 12] = std::array::from_fn(|i| sym_grad_basis(i / 6, dg[i % 6]));

                for i in 0..6 {
                    for j in 0..6 {
                        let mass = w * nvals[i] * nvals[j];
                        let conv = 0.5 * w * (adv[j] * nvals[i] - adv[i] * nvals[j]);
                        for c in 0..2 {
                            rate!(6 * c + i, 6 * c + j, mass);
                            mid!(6 * c + i, 6 * c + j, conv);
                            for e in 0..2 {
                                mid!(6 * c + i, 6 * e + j, lg * mass * n[c] * n[e]);
                            }
                        }
                    }
                }
                for i in 0..12 {
                    for j in 0..12 {
                        mid!(i, j, w * sigma_d_pair(params, n, d[j], d[i]));
                    }
                }
                for s in 0..3 {
                    for j in 0..6 {
                        for c in 0..2 {
                            let b = w * mvals[s] * dg[j][c];
                            lhs[6 * c + j][LP + s] -= b;
                            mid!(LP + s, 6 * c + j, b);
                            let g = w * mvals[s] * n[c] * nvals[j];
                            rate!(6 * c + j, LPHI + s, lg * g);
                            mid!(LPHI + s, 6 * c + j, g / params.gamma);
                        }
                    }
                    for r in 0..3 {
                        let m = w * mvals[s] * mvals[r];
                        rate!(LPHI + s, LPHI + r, m / params.gamma);
                        lhs[LPSI + s][LPSI + r] += m;
                    }
                }
            }

            let a = disc.p1_gradient(t, &prev.phi);
            let b_star = disc.p1_gradient(t, phi_frozen);
            let (cm, dv) = params.scheme.linearize(a, b_star);
            let area = geo.area;
            for s in 0..3 {
                for r in 0..3 {
                    let kk = area * (gm[s][0] * gm[r][0] + gm[s][1] * gm[r][1]);
                    mid!(LPHI + s, LPSI + r, kk);
                    lhs[LPSI + s][LPHI + r] -= kk;
                    let cg = [
                        cm[0][0] * gm[r][0] + cm[0][1] * gm[r][1],
                        cm[1][0] * gm[r][0] + cm[1][1] * gm[r][1],
                    ];
                    lhs[LPHI + s][LPHI + r] += inv_eps2 * area * (cg[0] * gm[s][0] + cg[1] * gm[s][1]);
                }
                cst[LPHI + s] -= inv_eps2 * area * (dv[0] * gm[s][0] + dv[1] * gm[s][1]);
            }

            let vd = disc.velocity.element(t);
            let sd = disc.scalar.element(t);
            let x_old: [f64; NL] = std::array::from_fn(|k| match k {
                0..6 => prev.u[vd[k]],
                6..LP => prev.u[nv + vd[k - 6]],
                LP..LPHI => 0.0,
                LPHI..LPSI => prev.phi[sd[k - LPHI]],
                _ => prev.psi[sd[k - LPSI]],
            });

            let rows = &self.element_rows[t];
            let map = &self.element_map[t * NL * NL..(t + 1) * NL * NL];
            for r in 0..NL {
                if self.is_dirichlet[rows[r]] {
                    continue;
                }
                let mut acc = cst[r];
                for c in 0..NL {
                    acc += old[r][c] * x_old[c];
                    let ix = map[r * NL + c];
                    if ix != NONE {
                        matrix.values[ix as usize] += lhs[r][c];
                    }
                }
                rhs[rows[r]] += acc;
            }
        }

        for &ix in &self.dirichlet_diag {
            matrix.values[ix] = 1.0;
        }
        for (i, w) in disc.p1_integrals.iter().enumerate() {
            matrix.values[self.mult_col[i]] = *w;
            matrix.values[self.mult_row[i]] = *w;
        }
    }
}

/// One-shot assembly of the step system (see [`StepAssembler::assemble`]).
pub fn assemble_step_system(
    disc: &Discretization,
    params: &Params,
    prev: &State,
    ext: &Extrapolants,
    phi_frozen: &[f64],
) -> StepSystem {
    StepAssembler::new(disc).assemble(disc, params, prev, ext, phi_frozen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Mesh, Rect};
    use crate::spaces::QuadratureRule;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn disc(nx: usize) -> Discretization {
        Discretization::new(Mesh::structured_rect(nx, Rect::default()).unwrap())
    }

    fn random_interior_velocity(d: &Discretization, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let nv = d.n_velocity();
        let mut u: Vec<f64> = (0..2 * nv).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for &b in &d.velocity.boundary_dofs {
            u[b] = 0.0;
            u[nv + b] = 0.0;
        }
        u
    }

    #[test]
    fn mass_matrices_sum_to_area() {
        let d = disc(3);
        for kind in [ElementKind::P1, ElementKind::P2] {
            let m = assemble_mass(&d, kind);
            let ones = vec![1.0; m.n_rows];
            assert!((m.bilinear(&ones, &ones) - 4.0).abs() < 1e-13);
        }
    }

    #[test]
    fn stiffness_of_linear_field() {
        let d = disc(4);
        for kind in [ElementKind::P1, ElementKind::P2] {
            let k = assemble_stiffness(&d, kind);
            let dm = if kind == ElementKind::P1 { &d.scalar } else { &d.velocity };
            let ones = vec![1.0; k.n_rows];
            assert!(k.mul_vec(&ones).iter().all(|v| v.abs() < 1e-13));
            let x = dm.interpolate(|x, y| 2.0 * x - y);
            // ∫ |∇(2x - y)|² = 5 · 4
            assert!((k.bilinear(&x, &x) - 20.0).abs() < 1e-12);
        }
    }

    #[test]
    fn divergence_of_solenoidal_field_vanishes() {
        let d = disc(3);
        let b = assemble_divergence(&d);
        // u = (x², -2xy) is divergence-free and lies in P2.
        let mut u = d.velocity.interpolate(|x, _| x * x);
        u.extend(d.velocity.interpolate(|x, y| -2.0 * x * y));
        assert!(b.mul_vec(&u).iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn rigid_motion_has_no_viscous_stress() {
        let d = disc(3);
        let phi = d.scalar.interpolate(|x, y| 0.3 * x + 0.8 * y);
        let a = assemble_sigma_d(&d, &Params::default(), &phi);
        let mut u = d.velocity.interpolate(|_, y| 1.0 - y);
        u.extend(d.velocity.interpolate(|x, _| 2.0 + x));
        assert!(a.mul_vec(&u).iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn convection_matches_independent_quadrature() {
        // ũ = (1, 0) is solenoidal and v, w vanish on the boundary, so the
        // skew form equals ((ũ·∇)v, w).
        let d = disc(4);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v = random_interior_velocity(&d, &mut rng);
        let w = random_interior_velocity(&d, &mut rng);
        let nv = d.n_velocity();
        let mut ut = vec![1.0; nv];
        ut.extend(vec![0.0; nv]);
        let c = assemble_convection(&d, &ut);
        let got = c.bilinear(&w, &v);

        let rule = QuadratureRule::new(12).unwrap();
        let mut want = 0.0;
        for t in 0..d.n_elements() {
            let g = &d.geometry[t];
            let dofs = d.velocity.element(t);
            for q in 0..rule.len() {
                let (vals, rg) = crate::spaces::eval_basis(ElementKind::P2, rule.points[q]);
                for comp in 0..2 {
                    let mut dvx = 0.0;
                    let mut wv = 0.0;
                    for i in 0..6 {
                        dvx += v[comp * nv + dofs[i]] * g.grad(rg[i])[0];
                        wv += w[comp * nv + dofs[i]] * vals[i];
                    }
                    want += g.weight(rule.weights[q]) * dvx * wv;
                }
            }
        }
        assert!((got - want).abs() < 1e-12 * want.abs().max(1.0), "{got} vs {want}");
    }

    #[test]
    fn korn_form_is_coercive_on_interior_fields() {
        let d = disc(4);
        let p = Params { mu1: 0.0, mu5: 0.0, mu4: 1.0, ..Params::default() };
        let a = assemble_sigma_d(&d, &p, &vec![0.0; d.n_scalar()]);
        let k = assemble_stiffness(&d, ElementKind::P2);
        let nv = d.n_velocity();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let v = random_interior_velocity(&d, &mut rng);
            let grad2 = k.bilinear(&v[..nv], &v[..nv]) + k.bilinear(&v[nv..], &v[nv..]);
            // For no-slip fields ‖D(v)‖² ≥ ½‖∇v‖².
            assert!(a.bilinear(&v, &v) >= 0.5 * grad2 * (1.0 - 1e-12));
        }
    }

    #[test]
    fn initial_psi_of_constant_is_zero() {
        let d = disc(4);
        let psi = project_initial_psi(&d, &vec![0.7; d.n_scalar()]).unwrap();
        assert!(psi.iter().all(|&v| v.abs() < 1e-12));
    }

    fn rest_state(d: &Discretization, phi: Vec<f64>) -> State {
        let psi = project_initial_psi(d, &phi).unwrap();
        State {
            step: 0,
            t: 0.0,
            u: vec![0.0; 2 * d.n_velocity()],
            p: vec![0.0; d.n_scalar()],
            phi,
            psi,
            prev: None,
        }
    }

    #[test]
    fn step_system_structure() {
        let d = disc(3);
        let s0 = rest_state(&d, d.scalar.interpolate(|x, y| (x * y).sin()));
        let ext = Extrapolants { u: s0.u.clone(), phi: s0.phi.clone() };
        let asm = StepAssembler::new(&d);
        let sys = asm.assemble(&d, &Params::default(), &s0, &ext, &s0.phi);
        let l = asm.layout;
        assert_eq!(sys.matrix.n_rows, l.total);
        for &b in &d.velocity.boundary_dofs {
            for row in [l.ux + b, l.uy + b] {
                let (cols, vals) = sys.matrix.row(row);
                assert_eq!(cols, &[row]);
                assert_eq!(vals, &[1.0]);
                assert_eq!(sys.rhs[row], 0.0);
            }
        }
        assert_eq!(sys.matrix.get(l.mult, l.mult), 0.0);
        let (x, res) = crate::sparse::DirectSolver::new().solve(&sys.matrix, &sys.rhs).unwrap();
        assert!(res <= 1e-10);
        assert!(l.pressure(&x).iter().zip(&d.p1_integrals).map(|(p, w)| p * w).sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn constant_phi_at_rest_is_a_fixed_point() {
        let d = disc(3);
        for scheme in [crate::model::Scheme::Od2, crate::model::Scheme::Mp] {
            let p = Params { scheme, ..Params::default() };
            let s0 = rest_state(&d, vec![0.25; d.n_scalar()]);
            let ext = Extrapolants { u: s0.u.clone(), phi: s0.phi.clone() };
            let sys = assemble_step_system(&d, &p, &s0, &ext, &s0.phi);
            let x = solve_direct(&sys.matrix, &sys.rhs).unwrap();
            let l = BlockLayout::new(&d);
            assert!(l.velocity(&x).iter().all(|v| v.abs() < 1e-12));
            assert!(l.phi(&x).iter().all(|v| (v - 0.25).abs() < 1e-12));
            assert!(l.psi(&x).iter().all(|v| v.abs() < 1e-10));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]
            #[test]
            fn convection_is_skew(seed in any::<u64>()) {
                let d = disc(3);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let ut: Vec<f64> = (0..2 * d.n_velocity()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let v: Vec<f64> = (0..2 * d.n_velocity()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let c = assemble_convection(&d, &ut);
                let scale = c.max_abs() * v.iter().map(|x| x * x).sum::<f64>();
                prop_assert!(c.bilinear(&v, &v).abs() <= 1e-14 * scale.max(1.0));
            }

            #[test]
            fn viscous_form_is_nonnegative(
                seed in any::<u64>(), mu1 in 0.0f64..3.0, mu5 in 0.0f64..3.0, mu4 in 0.01f64..3.0,
            ) {
                let d = disc(2);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let phi: Vec<f64> = (0..d.n_scalar()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let v: Vec<f64> = (0..2 * d.n_velocity()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let p = Params { mu1, mu4, mu5, ..Params::default() };
                let a = assemble_sigma_d(&d, &p, &phi);
                prop_assert!(a.bilinear(&v, &v) >= -1e-12 * a.max_abs());
            }
        }
    }
}
