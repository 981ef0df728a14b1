//! Physical parameters, the discrete state, the layer-compression potential
//! and its two time discretizations, and the stored energies.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::mesh::Rect;
use crate::spaces::Discretization;

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

/// How the potential term `f(∇φ)` is discretized in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Second-order Taylor approximation about `∇φⁿ`; linear in `∇φⁿ⁺¹`,
    /// energy-stable only under `k < 2ε²/γ`.
    Od2,
    /// Midpoint secant approximation; unconditionally energy-stable,
    /// nonlinear, solved by fixed-point iteration on its tangent.
    Mp,
    /// Fully explicit `f(a)`. First order and only conditionally stable;
    /// kept for verification runs.
    Explicit,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Od2 => "od2",
            Scheme::Mp => "mp",
            Scheme::Explicit => "explicit",
        }
    }

    /// Whether `f^k` is affine in `b = ∇φⁿ⁺¹` for fixed `a = ∇φⁿ`.
    pub fn is_linear(self) -> bool {
        !matches!(self, Scheme::Mp)
    }

    /// The discrete potential `f^k(b, a)` with `b = ∇φⁿ⁺¹`, `a = ∇φⁿ`.
    pub fn fk(self, b: Vec2, a: Vec2) -> Vec2 {
        match self {
            Scheme::Od2 => fk_od2(b, a),
            Scheme::Mp => fk_mp(b, a),
            Scheme::Explicit => potential_f(a),
        }
    }

    /// Affine model `f^k(b, a) ≈ C b + d` used in one linear solve.
    ///
    /// Exact for the linear schemes. For `Mp` it is the tangent at the
    /// iterate `b_star`, so the model is exact once `b = b_star`.
    pub fn linearize(self, a: Vec2, b_star: Vec2) -> (Mat2, Vec2) {
        let (c, d) = match self {
            Scheme::Od2 => {
                let j = potential_f_jacobian(a);
                let c = [[0.5 * j[0][0], 0.5 * j[0][1]], [0.5 * j[1][0], 0.5 * j[1][1]]];
                let f = potential_f(a);
                (c, [f[0] - c[0][0] * a[0] - c[0][1] * a[1], f[1] - c[1][0] * a[0] - c[1][1] * a[1]])
            }
            Scheme::Mp => {
                // Tangent of b ↦ f^k(b, a) at b_star.
                let s = 0.5 * (0.5 * (norm2(a) + norm2(b_star)) - 1.0);
                let m = [0.5 * (a[0] + b_star[0]), 0.5 * (a[1] + b_star[1])];
                let c = [
                    [s + m[0] * b_star[0], m[0] * b_star[1]],
                    [m[1] * b_star[0], s + m[1] * b_star[1]],
                ];
                let f = fk_mp(b_star, a);
                (c, [
                    f[0] - c[0][0] * b_star[0] - c[0][1] * b_star[1],
                    f[1] - c[1][0] * b_star[0] - c[1][1] * b_star[1],
                ])
            }
            Scheme::Explicit => ([[0.0; 2]; 2], potential_f(a)),
        };
        (c, d)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown scheme '{0}' (expected od2 or mp)")]
pub struct UnknownScheme(pub String);

impl FromStr for Scheme {
    type Err = UnknownScheme;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "od2" => Ok(Scheme::Od2),
            "mp" => Ok(Scheme::Mp),
            _ => Err(UnknownScheme(s.to_string())),
        }
    }
}

#[inline]
fn norm2(v: Vec2) -> f64 {
    v[0] * v[0] + v[1] * v[1]
}

/// `F(n) = ¼(|n|² - 1)²`
#[inline]
pub fn potential_big_f(n: Vec2) -> f64 {
    let s = norm2(n) - 1.0;
    0.25 * s * s
}

/// `f(n) = ∇F = (|n|² - 1) n`
#[inline]
pub fn potential_f(n: Vec2) -> Vec2 {
    let s = norm2(n) - 1.0;
    [s * n[0], s * n[1]]
}

/// `f'(n) = (|n|² - 1) I + 2 n nᵀ`
#[inline]
pub fn potential_f_jacobian(n: Vec2) -> Mat2 {
    let s = norm2(n) - 1.0;
    [[s + 2.0 * n[0] * n[0], 2.0 * n[0] * n[1]], [2.0 * n[1] * n[0], s + 2.0 * n[1] * n[1]]]
}

/// `(a·b) a + |a|²(b - a)/2 - (a + b)/2`, i.e. `f(a) + ½ f'(a)(b - a)`.
#[inline]
pub fn fk_od2(b: Vec2, a: Vec2) -> Vec2 {
    let ab = a[0] * b[0] + a[1] * b[1];
    let aa = norm2(a);
    [
        ab * a[0] + 0.5 * aa * (b[0] - a[0]) - 0.5 * (a[0] + b[0]),
        ab * a[1] + 0.5 * aa * (b[1] - a[1]) - 0.5 * (a[1] + b[1]),
    ]
}

/// `((|a|² + |b|²)/2 - 1)(a + b)/2`; satisfies `f^k·(b - a) = F(b) - F(a)`.
#[inline]
pub fn fk_mp(b: Vec2, a: Vec2) -> Vec2 {
    let s = 0.5 * (norm2(a) + norm2(b)) - 1.0;
    [0.5 * s * (a[0] + b[0]), 0.5 * s * (a[1] + b[1])]
}

/// `x` rounded to 12 significant digits, for messages.
pub(crate) fn round_sig(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub mu1: f64,
    pub mu4: f64,
    pub mu5: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub dt: f64,
    pub t_end: f64,
    pub nx: usize,
    pub bounds: Rect,
    pub scheme: Scheme,
    pub tol_picard: f64,
    pub max_picard: usize,
    /// Relative residual a linear solve must reach.
    pub tol_lin: f64,
    pub out_every: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            mu1: 1.0,
            mu4: 1.0,
            mu5: 1.0,
            lambda: 1.0,
            gamma: 1.0,
            epsilon: 0.05,
            dt: 1e-5,
            t_end: 0.086,
            nx: 32,
            bounds: Rect::default(),
            scheme: Scheme::Od2,
            tol_picard: 1e-9,
            max_picard: 50,
            tol_lin: crate::sparse::SOLVE_RTOL,
            out_every: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{key}: {message}")]
pub struct ParamError {
    pub key: &'static str,
    pub message: String,
}

impl Params {
    /// Largest time step for which `Od2` is energy-stable: `2ε²/γ`.
    pub fn solvability_bound(&self) -> f64 {
        2.0 * self.epsilon * self.epsilon / self.gamma
    }

    /// True when the chosen scheme is `Od2` and `dt` is at or above the bound.
    ///
    /// A `dt` within a few rounding units below the bound counts as on it:
    /// `2 · 0.05²` evaluates one ulp above `5e-3`, and `dt = 5e-3` must refuse.
    pub fn violates_solvability(&self) -> bool {
        self.scheme == Scheme::Od2 && self.dt >= self.solvability_bound() * (1.0 - 4.0 * f64::EPSILON)
    }

    pub fn n_steps(&self) -> usize {
        // Guard against t_end/dt landing a hair above an integer.
        let r = self.t_end / self.dt;
        let n = r.round();
        if (r - n).abs() <= 1e-9 * n.max(1.0) {
            n as usize
        } else {
            r.ceil() as usize
        }
    }

    /// Checks every field; the solvability bound is checked separately.
    pub fn validate(&self) -> Result<(), Vec<ParamError>> {
        let mut errs = Vec::new();
        let mut positive = |key: &'static str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                errs.push(ParamError { key, message: format!("must be positive and finite, got {v}") });
            }
        };
        positive("mu4", self.mu4);
        positive("gamma", self.gamma);
        positive("epsilon", self.epsilon);
        positive("dt", self.dt);
        positive("t_end", self.t_end);
        positive("tol_picard", self.tol_picard);
        positive("tol_lin", self.tol_lin);
        for (key, v) in [("mu1", self.mu1), ("mu5", self.mu5), ("lambda", self.lambda)] {
            if !(v.is_finite() && v >= 0.0) {
                errs.push(ParamError { key, message: format!("must be non-negative and finite, got {v}") });
            }
        }
        if self.nx == 0 {
            errs.push(ParamError { key: "nx", message: "must be at least 1".into() });
        }
        if self.max_picard == 0 {
            errs.push(ParamError { key: "max_picard", message: "must be at least 1".into() });
        }
        if self.out_every == 0 {
            errs.push(ParamError { key: "out_every", message: "must be at least 1".into() });
        }
        if !self.bounds.is_valid() {
            errs.push(ParamError { key: "bounds", message: format!("degenerate domain {:?}", self.bounds) });
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

/// Velocity and `φ` at the level before the current one, kept for the
/// two-step extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct PrevLevel {
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
}

/// Coefficient vectors at one time level.
///
/// `u` holds the P2 x-components followed by the y-components. `p` is the
/// pressure at the preceding half step (zero at `t = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub step: usize,
    pub t: f64,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub prev: Option<PrevLevel>,
}

/// Stored energies of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energies {
    pub kinetic: f64,
    pub elastic: f64,
    pub penalty: f64,
    pub total: f64,
}

/// `∫ F(∇φ)` for P1 `φ`; the integrand is element-wise constant.
pub fn penalty_integral(disc: &Discretization, phi: &[f64]) -> f64 {
    (0..disc.n_elements()).map(|t| disc.geometry[t].area * potential_big_f(disc.p1_gradient(t, phi))).sum()
}

/// `½‖u‖²` with the assembly quadrature.
pub fn kinetic_energy(disc: &Discretization, u: &[f64]) -> f64 {
    let mut e = 0.0;
    for t in 0..disc.n_elements() {
        let g = &disc.geometry[t];
        for (q, &w) in disc.rule.weights.iter().enumerate() {
            let v = disc.velocity_at(t, q, u);
            e += g.weight(w) * norm2(v);
        }
    }
    0.5 * e
}

/// `½‖ψ‖²` for P1 `ψ`.
pub fn scalar_half_norm2(disc: &Discretization, c: &[f64]) -> f64 {
    let mut e = 0.0;
    for t in 0..disc.n_elements() {
        let g = &disc.geometry[t];
        for (q, &w) in disc.rule.weights.iter().enumerate() {
            let v = disc.scalar_at(t, q, c);
            e += g.weight(w) * v * v;
        }
    }
    0.5 * e
}

pub fn energies(disc: &Discretization, params: &Params, state: &State) -> Energies {
    let kinetic = kinetic_energy(disc, &state.u);
    let elastic = scalar_half_norm2(disc, &state.psi);
    let penalty = penalty_integral(disc, &state.phi) / (params.epsilon * params.epsilon);
    Energies { kinetic, elastic, penalty, total: kinetic + params.lambda * (elastic + penalty) }
}
