//! Scalar field invariants of the Lorentz and Galilei groups.

use serde::{Deserialize, Serialize};

use super::{Constants, PointEMField};
use crate::error::Result;

/// The six Lorentz invariants `I1..I6`, stored as `values[0..6]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzInvariants {
    pub values: [f64; 6],
}

/// The six Galilean invariants `Î1..Î6`, stored as `values[0..6]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalileanInvariants {
    pub values: [f64; 6],
}

pub fn lorentz_invariants(f: &PointEMField, k: &Constants) -> Result<LorentzInvariants> {
    f.ensure_finite()?;
    let (e, b, d, h) = (f.e, f.b, f.d, f.h);
    let ic2 = k.inv_c2();
    Ok(LorentzInvariants {
        values: [
            b.norm_sq() - e.norm_sq() * ic2,
            b.dot(e),
            d.norm_sq() - h.norm_sq() * ic2,
            h.dot(d),
            b.dot(h) - e.dot(d),
            b.dot(d) + e.dot(h) * ic2,
        ],
    })
}

pub fn galilean_invariants(f: &PointEMField) -> Result<GalileanInvariants> {
    f.ensure_finite()?;
    let (e, b, d, h) = (f.e, f.b, f.d, f.h);
    Ok(GalileanInvariants {
        values: [
            b.norm_sq(),
            b.dot(e),
            d.norm_sq(),
            h.dot(d),
            b.dot(h) - e.dot(d),
            b.dot(d),
        ],
    })
}

/// Natural magnitude of each Lorentz invariant, used to turn absolute
/// differences into relative ones when an invariant happens to be near zero.
pub fn lorentz_scales(f: &PointEMField, k: &Constants) -> [f64; 6] {
    let (e, b, d, h) = (f.e.norm(), f.b.norm(), f.d.norm(), f.h.norm());
    let ic = 1.0 / k.c();
    [
        b * b + (e * ic) * (e * ic),
        b * e,
        d * d + (h * ic) * (h * ic),
        h * d,
        b * h + e * d,
        b * d + e * h * ic * ic,
    ]
}

/// Magnitude scale of each Galilean invariant including the terms a boost by
/// `speed` introduces at intermediate stages of the transform.
pub fn galilean_scales(f: &PointEMField, speed: f64) -> [f64; 6] {
    let (e, b, d, h) = (f.e.norm(), f.b.norm(), f.d.norm(), f.h.norm());
    let e_eff = e + speed * b;
    let h_eff = h + speed * d;
    [b * b, b * e_eff, d * d, h_eff * d, b * h_eff + e_eff * d, b * d]
}
