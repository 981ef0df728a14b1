//! Browser bindings: an interactive simulation on a coarse mesh and a
//! pointwise explorer for the discrete potential gradients.
//!
//! [`Demo`] and [`potential_work`] are plain Rust and tested natively; the
//! `#[wasm_bindgen]` wrappers only convert errors.

use wasm_bindgen::prelude::*;

use smectic::diagnostics::EnergyReport;
use smectic::model::{energies, potential_big_f, Energies, Params, Scheme, Vec2};
use smectic::timestepping::{InitialPhi, Simulation};

pub struct Demo {
    sim: Simulation,
    reports: Vec<EnergyReport>,
    initial: Energies,
}

impl Demo {
    pub fn create(nx: usize, dt: f64, scheme: &str, initial: &str) -> Result<Self, String> {
        let scheme: Scheme = scheme.parse().map_err(|e| format!("{e}"))?;
        let initial: InitialPhi = initial.parse().map_err(|e| format!("{e}"))?;
        let params = Params { nx, dt, scheme, t_end: f64::MAX, ..Params::default() };
        if params.violates_solvability() {
            return Err(format!("dt must stay below 2 epsilon^2 / gamma = {:.6e} for od2", params.solvability_bound()));
        }
        let sim = Simulation::new(params, initial).map_err(|e| e.to_string())?;
        let initial = energies(&sim.disc, &sim.params, &sim.state);
        Ok(Self { sim, reports: Vec::new(), initial })
    }

    /// Takes `n` steps; returns the step count reached.
    pub fn advance(&mut self, n: usize) -> Result<usize, String> {
        for _ in 0..n {
            let r = self.sim.step().map_err(|e| e.to_string())?;
            self.reports.push(r);
        }
        Ok(self.sim.state.step)
    }

    pub fn time(&self) -> f64 {
        self.sim.state.t
    }

    /// Vertex coordinates, flattened `x0, y0, x1, y1, …`.
    pub fn vertex_coords(&self) -> Vec<f64> {
        self.sim.disc.mesh.vertices.iter().flat_map(|p| *p).collect()
    }

    pub fn triangle_indices(&self) -> Vec<u32> {
        self.sim.disc.mesh.triangles.iter().flat_map(|t| t.map(|i| i as u32)).collect()
    }

    pub fn phi_at_vertices(&self) -> Vec<f64> {
        self.sim.state.phi[..self.sim.disc.mesh.n_vertices()].to_vec()
    }

    /// `|u|` at the vertices.
    pub fn speed_at_vertices(&self) -> Vec<f64> {
        let nv = self.sim.disc.mesh.n_vertices();
        let n_vel = self.sim.disc.n_velocity();
        let u = &self.sim.state.u;
        (0..nv).map(|v| u[v].hypot(u[n_vel + v])).collect()
    }

    /// Per step: `t, e_kin, e_ela, e_pen, e_tot, nd_phobic, relative identity residual`,
    /// flattened. Step 0 is included with zero defect and residual.
    pub fn energy_history(&self) -> Vec<f64> {
        let e = &self.initial;
        let mut out = vec![0.0, e.kinetic, e.elastic, e.penalty, e.total, 0.0, 0.0];
        for r in &self.reports {
            out.extend([r.t, r.e_kin, r.e_ela, r.e_pen, r.e_tot, r.nd_phobic, r.relative_residual()]);
        }
        out
    }
}

/// `[f^k·(b - a), F(b) - F(a), defect]` for one pair of director values.
pub fn potential_work(a: Vec2, b: Vec2, scheme: &str) -> Result<[f64; 3], String> {
    let scheme: Scheme = scheme.parse().map_err(|e| format!("{e}"))?;
    let fk = scheme.fk(b, a);
    let work = fk[0] * (b[0] - a[0]) + fk[1] * (b[1] - a[1]);
    let delta = potential_big_f(b) - potential_big_f(a);
    Ok([work, delta, work - delta])
}

#[wasm_bindgen(js_name = Demo)]
pub struct JsDemo(Demo);

#[wasm_bindgen(js_class = Demo)]
impl JsDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(nx: usize, dt: f64, scheme: &str, initial: &str) -> Result<JsDemo, JsError> {
        Demo::create(nx, dt, scheme, initial).map(JsDemo).map_err(|e| JsError::new(&e))
    }

    pub fn step(&mut self, n: usize) -> Result<usize, JsError> {
        self.0.advance(n).map_err(|e| JsError::new(&e))
    }

    pub fn time(&self) -> f64 {
        self.0.time()
    }

    pub fn vertices(&self) -> Vec<f64> {
        self.0.vertex_coords()
    }

    pub fn triangles(&self) -> Vec<u32> {
        self.0.triangle_indices()
    }

    pub fn phi(&self) -> Vec<f64> {
        self.0.phi_at_vertices()
    }

    pub fn speed(&self) -> Vec<f64> {
        self.0.speed_at_vertices()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.0.energy_history()
    }
}

#[wasm_bindgen(js_name = potentialWork)]
pub fn js_potential_work(ax: f64, ay: f64, bx: f64, by: f64, scheme: &str) -> Result<Vec<f64>, JsError> {
    potential_work([ax, ay], [bx, by], scheme).map(|r| r.to_vec()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = solvabilityBound)]
pub fn solvability_bound(epsilon: f64, gamma: f64) -> f64 {
    Params { epsilon, gamma, ..Params::default() }.solvability_bound()
}
