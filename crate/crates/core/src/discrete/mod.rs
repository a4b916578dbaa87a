//! Periodic grids, gridded fields, discrete operators and file formats.

mod field;
pub mod fs1;
mod grid;
mod history;
pub mod ops;
pub mod spectral;

pub use field::{cross_const, dot_fields, GridField, ScalarField, VectorField};
pub use grid::{Grid3, Scheme};
pub use history::{potentials_to_fields, FieldHistory, HistoryMeta, Potentials};
pub use ops::{ddt, resample_shifted, DiffOps};
