//! Linear and Doebner–Goldin Schrödinger evolution with minimal coupling.

pub mod dg;
mod gauge;
mod step;
mod wavefunction;

pub use dg::{densities, densities_with, dg_potential, phase_current, DGParams};
pub use gauge::apply_gauge;
pub use step::{step_schrodinger, SchrodingerStepper};
pub use wavefunction::{init_wavefunction, snap_to_lattice, InitialState, Particle, WaveFunction};
