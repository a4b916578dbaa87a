use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vacuum permittivity, permeability and the derived speed of light.
///
/// `c` is always computed from `eps0 * mu0 * c^2 = 1`; it is never stored
/// independently of the other two.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConstantsSpec", into = "ConstantsSpec")]
pub struct Constants {
    eps0: f64,
    mu0: f64,
    c: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantsSpec {
    eps0: f64,
    mu0: f64,
}

impl TryFrom<ConstantsSpec> for Constants {
    type Error = Error;
    fn try_from(s: ConstantsSpec) -> Result<Self> {
        Constants::new(s.eps0, s.mu0)
    }
}

impl From<Constants> for ConstantsSpec {
    fn from(k: Constants) -> Self {
        ConstantsSpec {
            eps0: k.eps0,
            mu0: k.mu0,
        }
    }
}

impl Constants {
    pub fn new(eps0: f64, mu0: f64) -> Result<Self> {
        if !(eps0.is_finite() && mu0.is_finite() && eps0 > 0.0 && mu0 > 0.0) {
            return Err(Error::InvalidConstants(format!(
                "eps0 = {eps0}, mu0 = {mu0} must be positive and finite"
            )));
        }
        Ok(Self {
            eps0,
            mu0,
            c: 1.0 / (eps0 * mu0).sqrt(),
        })
    }

    /// eps0 = mu0 = 1, hence c = 1.
    pub fn unit() -> Self {
        Self {
            eps0: 1.0,
            mu0: 1.0,
            c: 1.0,
        }
    }

    /// SI values (CODATA 2018).
    pub fn si() -> Self {
        Self::new(8.854_187_8128e-12, 1.256_637_062_12e-6).expect("SI constants are valid")
    }

    /// Unit permeability with eps0 = 1/c^2, used for c -> infinity studies.
    pub fn with_c(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidConstants(format!("c = {c} must be positive")));
        }
        let mut k = Self::new(1.0 / (c * c), 1.0)?;
        k.c = c;
        Ok(k)
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn inv_c2(&self) -> f64 {
        self.eps0 * self.mu0
    }
}

impl Default for Constants {
    fn default() -> Self {
        Self::unit()
    }
}
