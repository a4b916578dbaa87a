use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discrete::{Grid3, GridField, ScalarField};
use crate::em::Vec3;
use crate::error::{Error, Result};

/// Mass, charge and reduced Planck constant of the simulated particle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Particle {
    pub m: f64,
    pub e: f64,
    pub hbar: f64,
}

impl Particle {
    pub fn new(m: f64, e: f64, hbar: f64) -> Result<Self> {
        let p = Self { m, e, hbar };
        p.validate()?;
        Ok(p)
    }

    /// `m = hbar = 1`, charge `e`.
    pub fn natural(e: f64) -> Self {
        Self { m: 1.0, e, hbar: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m.is_finite() && self.m > 0.0 && self.hbar.is_finite() && self.hbar > 0.0)
            || !self.e.is_finite()
        {
            return Err(Error::BadParams(format!(
                "particle m = {}, e = {}, hbar = {} (m and hbar must be positive)",
                self.m, self.e, self.hbar
            )));
        }
        Ok(())
    }
}

/// Complex amplitude on a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction {
    pub grid: Grid3,
    pub psi: Vec<Complex64>,
    pub particle: Particle,
}

impl WaveFunction {
    pub fn new(grid: Grid3, psi: Vec<Complex64>, particle: Particle) -> Result<Self> {
        if psi.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: psi.len(),
            });
        }
        particle.validate()?;
        Ok(Self {
            grid,
            psi,
            particle,
        })
    }

    /// `∫ |psi|^2 dV` as a fixed-order sum.
    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::BadParams(format!("cannot normalize state of norm {n}")));
        }
        let s = 1.0 / n.sqrt();
        for c in &mut self.psi {
            *c *= s;
        }
        Ok(())
    }

    pub fn density(&self) -> ScalarField {
        ScalarField::from_data(self.psi.iter().map(|c| c.norm_sqr()).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.psi.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.psi.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite("wavefunction"))
        }
    }

    /// Expectation of position along `axis`, computed with the minimum-image
    /// offset from `reference`.
    pub fn mean_position(&self, axis: usize, reference: f64) -> f64 {
        let l = self.grid.lengths()[axis];
        let rho = self.density();
        let mut acc = 0.0;
        let mut w = 0.0;
        for i in 0..self.grid.len() {
            let x = min_image(self.grid.position(i)[axis] - reference, l);
            acc += rho[i] * x;
            w += rho[i];
        }
        reference + acc / w
    }

    /// Standard deviation of position along `axis` around `center`.
    pub fn width(&self, axis: usize, center: f64) -> f64 {
        let l = self.grid.lengths()[axis];
        let rho = self.density();
        let (mut m1, mut m2, mut w) = (0.0, 0.0, 0.0);
        for i in 0..self.grid.len() {
            let x = min_image(self.grid.position(i)[axis] - center, l);
            m1 += rho[i] * x;
            m2 += rho[i] * x * x;
            w += rho[i];
        }
        let mean = m1 / w;
        (m2 / w - mean * mean).sqrt()
    }
}

pub(crate) fn min_image(dx: f64, l: f64) -> f64 {
    dx - l * (dx / l).round()
}

/// Initial wavefunction shapes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialState {
    Uniform,
    PlaneWave {
        k: Vec3,
    },
    /// Localized with standard deviation `width` of `|psi|^2` along the
    /// flagged axes, uniform along the others; carries momentum `hbar k`.
    Gaussian {
        center: Vec3,
        width: f64,
        axes: [bool; 3],
        #[serde(default)]
        k: Vec3,
    },
}

/// Rounds a wave vector to the nearest one commensurate with the box.
pub fn snap_to_lattice(grid: &Grid3, k: Vec3) -> Vec3 {
    let l = grid.lengths();
    Vec3::from_array([0, 1, 2].map(|a| {
        let n = (k[a] * l[a] / TAU).round();
        TAU * n / l[a]
    }))
}

pub fn init_wavefunction(
    state: &InitialState,
    grid: &Grid3,
    particle: Particle,
) -> Result<WaveFunction> {
    particle.validate()?;
    let psi: Vec<Complex64> = match state {
        InitialState::Uniform => vec![Complex64::new(1.0, 0.0); grid.len()],
        InitialState::PlaneWave { k } => {
            if !k.is_finite() {
                return Err(Error::BadParams("plane-wave k must be finite".into()));
            }
            let k = snap_to_lattice(grid, *k);
            (0..grid.len())
                .map(|i| Complex64::from_polar(1.0, k.dot(grid.position(i))))
                .collect()
        }
        InitialState::Gaussian {
            center,
            width,
            axes,
            k,
        } => {
            if !(width.is_finite() && *width > 0.0) || !center.is_finite() || !k.is_finite() {
                return Err(Error::BadParams(format!(
                    "gaussian needs finite center/k and positive width, got width {width}"
                )));
            }
            let k = snap_to_lattice(grid, *k);
            let l = grid.lengths();
            (0..grid.len())
                .map(|i| {
                    let x = grid.position(i);
                    let mut r2 = 0.0;
                    for a in 0..3 {
                        if axes[a] {
                            let d = min_image(x[a] - center[a], l[a]);
                            r2 += d * d;
                        }
                    }
                    Complex64::from_polar((-r2 / (4.0 * width * width)).exp(), k.dot(x))
                })
                .collect()
        }
    };
    let mut wf = WaveFunction::new(*grid, psi, particle)?;
    wf.normalize()?;
    Ok(wf)
}
