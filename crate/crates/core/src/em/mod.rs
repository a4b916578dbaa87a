//! Point-wise field algebra: vectors, constants, invariants and
//! constitutive laws.

mod constants;
pub mod expr;
mod field;
pub mod invariants;
pub mod law;
pub mod limits;
mod vec3;

pub use constants::Constants;
pub use field::{PointEMField, SourceDensity};
pub use invariants::{galilean_invariants, lorentz_invariants, GalileanInvariants, LorentzInvariants};
pub use law::{
    constitutive_jacobian, eval_constitutive_mn, eval_constitutive_qr, ConstitutiveLaw, Jacobian6,
    LawFamily,
};
pub use vec3::Vec3;
