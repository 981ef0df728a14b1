//! Finite-element simulation of Smectic-A liquid crystal flow.
//!
//! The model couples incompressible Navier–Stokes velocity and pressure to a
//! layer variable `φ` (whose gradient is the layer normal) and the auxiliary
//! field `ψ = −Δφ`. Space is discretized with P2/P1 Taylor–Hood elements for
//! `(u, p)` and P1/P1 elements for `(φ, ψ)`; time is advanced by a coupled
//! second-order midpoint scheme with a discrete energy law that
//! [`diagnostics`] checks step by step.

pub mod assembly;
pub mod diagnostics;
pub mod io;
pub mod mesh;
pub mod model;
pub mod sparse;
pub mod spaces;
pub mod timestepping;
