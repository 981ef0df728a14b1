//! Time integration: a Crank–Nicolson first step, then BDF2-extrapolated
//! midpoint steps, with Picard iteration wherever the step is nonlinear.

use std::fmt;
use std::io;
use std::str::FromStr;

use thiserror::Error;

use crate::assembly::{project_initial_psi, Extrapolants, StepAssembler};
use crate::diagnostics::{energy_report, DiagnosticsError, EnergyReport};
use crate::mesh::{Mesh, MeshError};
use crate::model::{ParamError, Params, PrevLevel, State};
use crate::sparse::{CsrMatrix, DirectSolver, SparseError};
use crate::spaces::Discretization;

/// Named initial layer fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialPhi {
    /// `sin(x) cos²(y)`
    SinCos2,
    /// `0`
    Zero,
    /// `cos(πx) cos(πy)`
    Cosine,
}

impl InitialPhi {
    pub const ALL: [InitialPhi; 3] = [InitialPhi::SinCos2, InitialPhi::Zero, InitialPhi::Cosine];

    pub fn name(self) -> &'static str {
        match self {
            InitialPhi::SinCos2 => "sin_cos2",
            InitialPhi::Zero => "zero",
            InitialPhi::Cosine => "cosine",
        }
    }

    pub fn eval(self, x: f64, y: f64) -> f64 {
        match self {
            InitialPhi::SinCos2 => x.sin() * y.cos().powi(2),
            InitialPhi::Zero => 0.0,
            InitialPhi::Cosine => (std::f64::consts::PI * x).cos() * (std::f64::consts::PI * y).cos(),
        }
    }
}

impl fmt::Display for InitialPhi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown initial field '{0}' (expected sin_cos2, zero or cosine)")]
pub struct UnknownField(pub String);

impl FromStr for InitialPhi {
    type Err = UnknownField;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|f| f.name() == s.trim()).ok_or_else(|| UnknownField(s.to_string()))
    }
}

/// `φ⁰` interpolated, `ψ⁰` projected, `u⁰ = 0`, `p⁰ = 0`.
pub fn init_state(disc: &Discretization, initial: InitialPhi) -> Result<State, SparseError> {
    let phi = disc.scalar.interpolate(|x, y| initial.eval(x, y));
    let psi = project_initial_psi(disc, &phi)?;
    Ok(State {
        step: 0,
        t: 0.0,
        u: vec![0.0; 2 * disc.n_velocity()],
        p: vec![0.0; disc.n_scalar()],
        phi,
        psi,
        prev: None,
    })
}

#[derive(Debug, Error)]
pub enum StepError {
    #[error("linear solve failed: {0}")]
    Solver(#[from] SparseError),
    #[error("Picard iteration did not converge in {} iterations (relative changes {history:?})", history.len())]
    Picard { history: Vec<f64> },
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid parameters: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidParams(Vec<ParamError>),
    #[error(
        "dt = {dt:e} violates the od2 solvability condition dt < 2 epsilon^2 / gamma = {:e}; \
         use scheme mp, a smaller dt, or override",
        crate::model::round_sig(*bound)
    )]
    Solvability { dt: f64, bound: f64 },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("initialization failed: {0}")]
    Init(SparseError),
    #[error("step {step} (t = {t:e}) failed: {source}")]
    Step { step: usize, t: f64, source: StepError },
    #[error("output failed: {0}")]
    Sink(#[from] io::Error),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}

/// Consumer of per-step reports and periodic snapshots.
pub trait Sink {
    fn report(&mut self, _report: &EnergyReport) -> io::Result<()> {
        Ok(())
    }

    fn snapshot(&mut self, _disc: &Discretization, _state: &State) -> io::Result<()> {
        Ok(())
    }
}

impl Sink for Vec<EnergyReport> {
    fn report(&mut self, report: &EnergyReport) -> io::Result<()> {
        self.push(*report);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub assemblies: usize,
    pub solves: usize,
}

/// A discretized problem and its current state.
pub struct Simulation {
    pub disc: Discretization,
    pub params: Params,
    pub state: State,
    pub counters: Counters,
    assembler: StepAssembler,
    matrix: CsrMatrix,
    rhs: Vec<f64>,
    solver: DirectSolver,
}

impl Simulation {
    /// Validates `params` (but not the solvability bound), builds the mesh
    /// and the initial state.
    pub fn new(params: Params, initial: InitialPhi) -> Result<Self, RunError> {
        params.validate().map_err(RunError::InvalidParams)?;
        let mesh = Mesh::structured_rect(params.nx, params.bounds)?;
        let disc = Discretization::new(mesh);
        let state = init_state(&disc, initial).map_err(RunError::Init)?;
        Ok(Self::from_state(disc, params, state))
    }

    pub fn from_state(disc: Discretization, params: Params, state: State) -> Self {
        let assembler = StepAssembler::new(&disc);
        let matrix = assembler.pattern().clone();
        let rhs = vec![0.0; assembler.layout.total];
        let solver = DirectSolver::with_tolerance(params.tol_lin);
        Self { disc, params, state, counters: Counters::default(), assembler, matrix, rhs, solver }
    }

    /// Advances one step: Crank–Nicolson if no earlier level exists, BDF2
    /// otherwise.
    pub fn step(&mut self) -> Result<EnergyReport, StepError> {
        if self.state.prev.is_some() {
            self.step_bdf2()
        } else {
            self.bootstrap_step_cn()
        }
    }

    /// First step with `ũ = (uⁿ⁺¹ + uⁿ)/2`, `φ̃ = (φⁿ⁺¹ + φⁿ)/2`, solved by
    /// Picard iteration from the current level.
    pub fn bootstrap_step_cn(&mut self) -> Result<EnergyReport, StepError> {
        let guess = (self.state.u.clone(), self.state.phi.clone());
        self.advance(None, guess)
    }

    /// Step with `ũ = (3uⁿ - uⁿ⁻¹)/2`, `φ̃ = (3φⁿ - φⁿ⁻¹)/2`. Linear schemes
    /// take exactly one solve; the midpoint potential iterates on `φⁿ⁺¹`.
    ///
    /// # Panics
    /// If the state carries no earlier level.
    pub fn step_bdf2(&mut self) -> Result<EnergyReport, StepError> {
        let s = &self.state;
        let prev = s.prev.as_ref().expect("BDF2 step needs two levels");
        let extrap = |a: &[f64], b: &[f64], c0: f64, c1: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| c0 * x - c1 * y).collect()
        };
        let ext = Extrapolants { u: extrap(&s.u, &prev.u, 1.5, 0.5), phi: extrap(&s.phi, &prev.phi, 1.5, 0.5) };
        let guess = (s.u.clone(), extrap(&s.phi, &prev.phi, 2.0, 1.0));
        self.advance(Some(ext), guess)
    }

    fn advance(&mut self, fixed: Option<Extrapolants>, guess: (Vec<f64>, Vec<f64>)) -> Result<EnergyReport, StepError> {
        let level = &self.state;
        let layout = self.assembler.layout;
        let iterate = fixed.is_none() || !self.params.scheme.is_linear();
        let (mut it_u, mut it_phi) = guess;
        let mut history = Vec::new();

        for iter in 1..=self.params.max_picard {
            let ext = match &fixed {
                Some(e) => e.clone(),
                None => Extrapolants {
                    u: it_u.iter().zip(&level.u).map(|(a, b)| 0.5 * (a + b)).collect(),
                    phi: it_phi.iter().zip(&level.phi).map(|(a, b)| 0.5 * (a + b)).collect(),
                },
            };
            self.assembler.assemble_into(&self.disc, &self.params, level, &ext, &it_phi, &mut self.matrix, &mut self.rhs);
            self.counters.assemblies += 1;
            let (x, lin_res) = self.solver.solve(&self.matrix, &self.rhs)?;
            self.counters.solves += 1;
            let u = layout.velocity(&x);
            let phi = layout.phi(&x);

            let converged = if iterate {
                let change = norm2_pair(u, &it_u, phi, &it_phi);
                let increment = norm2_pair(u, &level.u, phi, &level.phi);
                let rel = change / increment.max(f64::MIN_POSITIVE);
                history.push(rel);
                rel <= self.params.tol_picard
            } else {
                true
            };
            if converged {
                let step = level.step + 1;
                let new = State {
                    step,
                    t: step as f64 * self.params.dt,
                    u: u.to_vec(),
                    p: layout.pressure(&x).to_vec(),
                    phi: phi.to_vec(),
                    psi: layout.psi(&x).to_vec(),
                    prev: Some(PrevLevel { u: level.u.clone(), phi: level.phi.clone() }),
                };
                let mut report = energy_report(&self.disc, &self.params, level, &new, &ext)?;
                report.picard_iters = iter;
                report.lin_res = lin_res;
                self.state = new;
                return Ok(report);
            }
            it_u = u.to_vec();
            it_phi = phi.to_vec();
        }
        Err(StepError::Picard { history })
    }

    /// Steps until `t_end`, feeding `sinks`. The initial state is sent as a
    /// snapshot, then every `out_every` steps and the last step.
    pub fn run_to_end(&mut self, sinks: &mut [&mut dyn Sink]) -> Result<(), RunError> {
        let n = self.params.n_steps();
        if self.state.step == 0 {
            for s in sinks.iter_mut() {
                s.snapshot(&self.disc, &self.state)?;
            }
        }
        while self.state.step < n {
            let report = self.step().map_err(|source| RunError::Step {
                step: self.state.step + 1,
                t: (self.state.step + 1) as f64 * self.params.dt,
                source,
            })?;
            for s in sinks.iter_mut() {
                s.report(&report)?;
            }
            if self.state.step.is_multiple_of(self.params.out_every) || self.state.step == n {
                for s in sinks.iter_mut() {
                    s.snapshot(&self.disc, &self.state)?;
                }
            }
        }
        Ok(())
    }
}

fn norm2_pair(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
        + c.iter().zip(d).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    s.sqrt()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub initial: Option<InitialPhi>,
    /// Run `od2` even when `dt ≥ 2ε²/γ`.
    pub override_solvability: bool,
}

/// Initializes, bootstraps with one Crank–Nicolson step and runs BDF2 steps
/// to `t_end`.
pub fn run(params: &Params, options: RunOptions, sinks: &mut [&mut dyn Sink]) -> Result<State, RunError> {
    params.validate().map_err(RunError::InvalidParams)?;
    if params.violates_solvability() && !options.override_solvability {
        return Err(RunError::Solvability { dt: params.dt, bound: params.solvability_bound() });
    }
    let mut sim = Simulation::new(params.clone(), options.initial.unwrap_or(InitialPhi::SinCos2))?;
    sim.run_to_end(sinks)?;
    Ok(sim.state)
}
