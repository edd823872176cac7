//! Compiled evaluation, fixed-step integration of the canonical equations
//! and conservation drift of first integrals.

mod compile;
mod drift;
mod integrate;

pub use compile::{compile, CompileError, CompiledFunction};
pub use drift::{convergence_order, drift, ConvergenceEstimate, DriftEntry, DriftReport, Monitored};
pub use integrate::{
    integrate, integrate_field, IntegratorConfig, Method, NumericsError, Trajectory, VectorField,
};
