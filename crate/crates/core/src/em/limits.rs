//! Distances between Lorentz-class quantities at finite `c` and their
//! Galilean counterparts.

use super::invariants::{galilean_invariants, lorentz_invariants};
use super::law::{ConstitutiveLaw, LawFamily};
use super::{Constants, PointEMField, Vec3};
use crate::error::{Error, Result};

/// L2 distance between `I1..I6` at speed `c` and `Î1..Î6`.
pub fn invariant_limit_gap(f: &PointEMField, c: f64) -> Result<f64> {
    let k = Constants::with_c(c)?;
    let l = lorentz_invariants(f, &k)?.values;
    let g = galilean_invariants(f)?.values;
    Ok(l.iter().zip(&g).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
}

/// L2 distance between the `(D, H)` of a Galilean MN law and of the Lorentz
/// MN law with the same coefficient expressions, at speed `c` with
/// `mu0 = 1`.
pub fn closure_limit_gap(law: &ConstitutiveLaw, e: Vec3, b: Vec3, c: f64) -> Result<f64> {
    if law.family() != LawFamily::GalileanMn {
        return Err(Error::WrongFamily {
            expected: "galilean-mn",
            got: law.family().to_string(),
        });
    }
    let (m, n) = law.coefficient_sources().expect("galilean-mn has coefficients");
    let lorentz = ConstitutiveLaw::from_strings(LawFamily::LorentzMn, m, n)?;
    let k = Constants::with_c(c)?;
    let (dl, hl) = lorentz.eval_mn(e, b, &k)?;
    let (dg, hg) = law.eval_mn(e, b, &k)?;
    Ok(((dl - dg).norm_sq() + (hl - hg).norm_sq()).sqrt())
}
