//! Maxwell electrodynamics with Lorentz- and Galilei-class constitutive
//! laws, frame transformations, discrete residual verification, and
//! minimally coupled (optionally Doebner-Goldin nonlinear) Schrodinger
//! dynamics on periodic grids.

pub mod discrete;
pub mod em;
pub mod quantum;
pub mod residuals;
pub mod solvers;
mod error;
pub mod stats;
pub mod transforms;

pub use discrete::{FieldHistory, Grid3, Potentials, ScalarField, Scheme, VectorField};
pub use em::{Constants, ConstitutiveLaw, LawFamily, PointEMField, SourceDensity, Vec3};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use quantum::{DGParams, Particle, WaveFunction};
pub use transforms::BoostParams;
