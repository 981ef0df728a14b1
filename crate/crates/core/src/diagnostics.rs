//! Per-step energy bookkeeping, conservation checks and the temporal
//! self-convergence study.

use thiserror::Error;

use crate::assembly::{sigma_d_pair, velocity_sym_grad, Extrapolants};
use crate::model::{energies, potential_big_f, Params, State};
use crate::spaces::Discretization;
use crate::timestepping::{RunError, Simulation, InitialPhi};

/// Everything the discrete energy law says about one step.
///
/// Field order matches the CSV columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub step: usize,
    pub t: f64,
    pub e_kin: f64,
    pub e_ela: f64,
    pub e_pen: f64,
    pub e_tot: f64,
    /// `(σ^d(D(u^{n+½}), ∇φ̃), D(u^{n+½}))`
    pub visc_diss: f64,
    /// `(λ/γ)‖δtφ + u^{n+½}·∇φ̃‖²`
    pub phi_diss: f64,
    /// `∫ f^k·δt∇φ - δt∫F(∇φ)`
    pub nd_phobic: f64,
    /// `δtE_tot + visc_diss + phi_diss + (λ/ε²) nd_phobic`
    pub energy_residual: f64,
    pub mass_phi: f64,
    pub div_res: f64,
    pub picard_iters: usize,
    pub lin_res: f64,
    /// `δtE_tot`, kept for normalizing the residual.
    pub de_tot: f64,
}

impl EnergyReport {
    /// Largest identity term the residual is measured against.
    pub fn identity_scale(&self) -> f64 {
        self.de_tot.abs().max(self.visc_diss).max(self.phi_diss).max(1e-30)
    }

    pub fn relative_residual(&self) -> f64 {
        self.energy_residual.abs() / self.identity_scale()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("state vectors do not match the discretization ({field}: expected {expected}, got {got})")]
    Mismatch { field: &'static str, expected: usize, got: usize },
    #[error("need at least {needed} entries, got {got}")]
    TooFew { needed: usize, got: usize },
}

fn check_len(field: &'static str, v: &[f64], expected: usize) -> Result<(), DiagnosticsError> {
    if v.len() == expected {
        Ok(())
    } else {
        Err(DiagnosticsError::Mismatch { field, expected, got: v.len() })
    }
}

/// Report for the step `prev → new` taken with extrapolants `ext`.
///
/// Increments are integrated element by element from differences of the two
/// levels, with the same quadrature as the assembly, so that the identity
/// residual reflects the solve and not cancellation in large energies.
/// `picard_iters` and `lin_res` are left at zero for the caller.
pub fn energy_report(
    disc: &Discretization,
    params: &Params,
    prev: &State,
    new: &State,
    ext: &Extrapolants,
) -> Result<EnergyReport, DiagnosticsError> {
    let nv = disc.n_velocity();
    let ns = disc.n_scalar();
    for (f, v, n) in [
        ("prev.u", &prev.u, 2 * nv),
        ("new.u", &new.u, 2 * nv),
        ("ext.u", &ext.u, 2 * nv),
        ("prev.phi", &prev.phi, ns),
        ("new.phi", &new.phi, ns),
        ("ext.phi", &ext.phi, ns),
        ("prev.psi", &prev.psi, ns),
        ("new.psi", &new.psi, ns),
    ] {
        check_len(f, v, n)?;
    }

    let k = params.dt;
    let e = energies(disc, params, new);
    let u_half: Vec<f64> = new.u.iter().zip(&prev.u).map(|(a, b)| 0.5 * (a + b)).collect();
    let u_diff: Vec<f64> = new.u.iter().zip(&prev.u).map(|(a, b)| a - b).collect();
    let phi_rate: Vec<f64> = new.phi.iter().zip(&prev.phi).map(|(a, b)| (a - b) / k).collect();
    let psi_half: Vec<f64> = new.psi.iter().zip(&prev.psi).map(|(a, b)| 0.5 * (a + b)).collect();
    let psi_diff: Vec<f64> = new.psi.iter().zip(&prev.psi).map(|(a, b)| a - b).collect();

    let mut d_kin = 0.0;
    let mut d_ela = 0.0;
    let mut d_pen = 0.0;
    let mut nd = 0.0;
    let mut visc = 0.0;
    let mut phi_diss = 0.0;
    let mut div = vec![0.0; ns];
    let mut qnorm2 = vec![0.0; ns];
    let mut div_const = 0.0;

    for t in 0..disc.n_elements() {
        let geo = &disc.geometry[t];
        let n = disc.p1_gradient(t, &ext.phi);
        let a = disc.p1_gradient(t, &prev.phi);
        let b = disc.p1_gradient(t, &new.phi);
        let fk = params.scheme.fk(b, a);
        let df = potential_big_f(b) - potential_big_f(a);
        d_pen += geo.area * df;
        nd += geo.area * (fk[0] * (b[0] - a[0]) + fk[1] * (b[1] - a[1]) - df);

        let sd = disc.scalar.element(t);
        for (q, &wq) in disc.rule.weights.iter().enumerate() {
            let w = geo.weight(wq);
            let uh = disc.velocity_at(t, q, &u_half);
            let ud = disc.velocity_at(t, q, &u_diff);
            d_kin += w * (ud[0] * uh[0] + ud[1] * uh[1]);
            d_ela += w * disc.scalar_at(t, q, &psi_diff) * disc.scalar_at(t, q, &psi_half);

            let dh = velocity_sym_grad(disc, t, q, &u_half);
            visc += w * sigma_d_pair(params, n, dh, dh);

            let s = disc.scalar_at(t, q, &phi_rate) + uh[0] * n[0] + uh[1] * n[1];
            phi_diss += w * s * s;

            let divu = dh[0] + dh[2];
            div_const += w * divu;
            let m = &disc.p1.values[q];
            for i in 0..3 {
                div[sd[i]] += w * m[i] * divu;
                qnorm2[sd[i]] += w * m[i] * m[i];
            }
        }
    }

    let lam = params.lambda;
    let inv_eps2 = 1.0 / (params.epsilon * params.epsilon);
    let de_tot = (d_kin + lam * (d_ela + inv_eps2 * d_pen)) / k;
    let nd = nd / k;
    let phi_diss = lam / params.gamma * phi_diss;
    let area: f64 = disc.geometry.iter().map(|g| g.area).sum();
    let div_res = div
        .iter()
        .zip(&qnorm2)
        .map(|(d, q)| d.abs() / q.sqrt())
        .fold(div_const.abs() / area.sqrt(), f64::max);

    Ok(EnergyReport {
        step: new.step,
        t: new.t,
        e_kin: e.kinetic,
        e_ela: e.elastic,
        e_pen: e.penalty,
        e_tot: e.total,
        visc_diss: visc,
        phi_diss,
        nd_phobic: nd,
        energy_residual: de_tot + visc + phi_diss + lam * inv_eps2 * nd,
        mass_phi: disc.integrate_scalar(&new.phi),
        div_res,
        picard_iters: 0,
        lin_res: 0.0,
        de_tot,
    })
}

/// Observed order from three solutions at `k`, `k/2`, `k/4`, using the
/// finest as reference: `‖x_k - x_{k/4}‖ / ‖x_{k/2} - x_{k/4}‖ = 2^p + 1`
/// in the asymptotic regime.
///
/// Returns `+∞` when the differences are at rounding level, i.e. the
/// scheme is exact on the problem.
pub fn observed_order(coarse: &[f64], mid: &[f64], fine: &[f64], norm: impl Fn(&[f64]) -> f64) -> f64 {
    let d1: Vec<f64> = coarse.iter().zip(fine).map(|(a, b)| a - b).collect();
    let d2: Vec<f64> = mid.iter().zip(fine).map(|(a, b)| a - b).collect();
    let (e1, e2) = (norm(&d1), norm(&d2));
    let scale = norm(fine).max(f64::MIN_POSITIVE);
    if e1 <= 1e-13 * scale || e2 <= 1e-13 * scale {
        return f64::INFINITY;
    }
    let r = e1 / e2 - 1.0;
    if r <= 0.0 {
        f64::NAN
    } else {
        r.log2()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderStudy {
    pub dts: Vec<f64>,
    /// One entry per consecutive triple of levels, coarsest first.
    pub phi_orders: Vec<f64>,
    pub u_orders: Vec<f64>,
}

impl OrderStudy {
    pub fn phi_order(&self) -> f64 {
        *self.phi_orders.last().expect("at least three levels")
    }

    pub fn u_order(&self) -> f64 {
        *self.u_orders.last().expect("at least three levels")
    }
}

/// Runs `base` with `dt, dt/2, …, dt/2^(n_levels-1)` to `base.t_end` and
/// reports the observed L² orders of `φ` and `u`.
pub fn temporal_order_study(base: &Params, initial: InitialPhi, n_levels: usize) -> Result<OrderStudy, RunError> {
    if n_levels < 3 {
        return Err(RunError::Diagnostics(DiagnosticsError::TooFew { needed: 3, got: n_levels }));
    }
    let mut finals = Vec::with_capacity(n_levels);
    let mut dts = Vec::with_capacity(n_levels);
    let mut disc = None;
    for l in 0..n_levels {
        let p = Params { dt: base.dt / f64::from(1u32 << l), ..base.clone() };
        dts.push(p.dt);
        let mut sim = Simulation::new(p, initial)?;
        sim.run_to_end(&mut [])?;
        finals.push(sim.state.clone());
        disc = Some(sim.disc);
    }
    let disc = disc.expect("n_levels >= 3");
    let l2_scalar = |v: &[f64]| (2.0 * crate::model::scalar_half_norm2(&disc, v)).sqrt();
    let l2_vector = |v: &[f64]| (2.0 * crate::model::kinetic_energy(&disc, v)).sqrt();
    let mut phi_orders = Vec::new();
    let mut u_orders = Vec::new();
    for w in finals.windows(3) {
        phi_orders.push(observed_order(&w[0].phi, &w[1].phi, &w[2].phi, l2_scalar));
        u_orders.push(observed_order(&w[0].u, &w[1].u, &w[2].u, l2_vector));
    }
    Ok(OrderStudy { dts, phi_orders, u_orders })
}

/// Time of peak kinetic energy and `E_kin(end) / E_kin(peak)`.
///
/// The ratio is 0 when the kinetic energy never leaves zero.
pub fn steady_state_monitor(reports: &[EnergyReport]) -> Result<(f64, f64), DiagnosticsError> {
    if reports.len() < 2 {
        return Err(DiagnosticsError::TooFew { needed: 2, got: reports.len() });
    }
    let peak = reports.iter().fold(&reports[0], |best, r| if r.e_kin > best.e_kin { r } else { best });
    let last = reports.last().unwrap().e_kin;
    let ratio = if peak.e_kin > 0.0 { last / peak.e_kin } else { 0.0 };
    Ok((peak.t, ratio))
}

/// Largest violation of `e_tot(n) - e_tot(0) = -k Σ (visc + phi_diss + (λ/ε²) nd)`.
pub fn telescoping_defect(params: &Params, e_tot0: f64, reports: &[EnergyReport]) -> f64 {
    let c = params.lambda / (params.epsilon * params.epsilon);
    let mut acc = 0.0;
    let mut worst: f64 = 0.0;
    for r in reports {
        acc += params.dt * (r.visc_diss + r.phi_diss + c * r.nd_phobic);
        worst = worst.max((r.e_tot - e_tot0 + acc).abs());
    }
    worst
}
