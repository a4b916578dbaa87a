use serde::{Deserialize, Serialize};

use super::Vec3;
use crate::error::{Error, Result};

/// The four field vectors at a single event.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PointEMField {
    pub e: Vec3,
    pub b: Vec3,
    pub d: Vec3,
    pub h: Vec3,
}

impl PointEMField {
    pub fn new(e: Vec3, b: Vec3, d: Vec3, h: Vec3) -> Self {
        Self { e, b, d, h }
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if [self.e, self.b, self.d, self.h].iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite("point field"))
        }
    }

    pub fn components(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for (i, v) in [self.e, self.b, self.d, self.h].iter().enumerate() {
            out[3 * i..3 * i + 3].copy_from_slice(&v.to_array());
        }
        out
    }
}

/// Charge and current density at a single event.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SourceDensity {
    pub rho: f64,
    pub j: Vec3,
}

impl SourceDensity {
    pub fn new(rho: f64, j: Vec3) -> Self {
        Self { rho, j }
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.rho.is_finite() && self.j.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite("source density"))
        }
    }

    pub fn components(&self) -> [f64; 4] {
        [self.rho, self.j.x, self.j.y, self.j.z]
    }
}

pub(crate) fn ensure_vec_finite(v: Vec3, what: &'static str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
