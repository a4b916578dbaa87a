//! Magnetic-limit fields, static nonlinear solves and the coupled
//! Schrödinger–Maxwell time loop.

mod coupled;
mod magnetic;
mod newton;

pub use coupled::{evolve_coupled, ChargeConvention, CouplingConfig, SourceModel, Trajectory};
pub use magnetic::{coulomb_potentials, fields_from_static_potentials, solve_magnetic_limit, transverse_part};
pub use newton::{
    solve_static, solve_static_case_a, trace_csv, NewtonConfig, NewtonStep, StaticSolution,
};
