use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::em::Vec3;
use crate::error::{Error, Result};

/// Uniform periodic grid on the box `[0, L0) x [0, L1) x [0, L2)`.
///
/// Flat indices run x-fastest: `idx = i + n0 * (j + n1 * k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid3 {
    n: [usize; 3],
    l: [f64; 3],
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    n: [usize; 3],
    l: [f64; 3],
}

impl TryFrom<GridSpec> for Grid3 {
    type Error = Error;
    fn try_from(s: GridSpec) -> Result<Self> {
        Grid3::new(s.n, s.l)
    }
}

impl From<Grid3> for GridSpec {
    fn from(g: Grid3) -> Self {
        GridSpec { n: g.n, l: g.l }
    }
}

impl Grid3 {
    pub const MIN_POINTS: usize = 4;

    pub fn new(n: [usize; 3], l: [f64; 3]) -> Result<Self> {
        for axis in 0..3 {
            if n[axis] < Self::MIN_POINTS {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis} has {} points, need at least {}",
                    n[axis],
                    Self::MIN_POINTS
                )));
            }
            if !(l[axis].is_finite() && l[axis] > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis} length {} must be positive",
                    l[axis]
                )));
            }
        }
        Ok(Self { n, l })
    }

    /// Cubic box with the same point count and length on each axis.
    pub fn cube(n: usize, l: f64) -> Result<Self> {
        Self::new([n; 3], [l; 3])
    }

    pub fn n(&self) -> [usize; 3] {
        self.n
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.l
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> [f64; 3] {
        [0, 1, 2].map(|a| self.l[a] / self.n[a] as f64)
    }

    pub fn volume(&self) -> f64 {
        self.l.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n[0] * (j + self.n[1] * k)
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.n[0];
        let j = (idx / self.n[0]) % self.n[1];
        let k = idx / (self.n[0] * self.n[1]);
        [i, j, k]
    }

    pub fn position(&self, idx: usize) -> Vec3 {
        let c = self.coords(idx);
        let dx = self.dx();
        Vec3::new(c[0] as f64 * dx[0], c[1] as f64 * dx[1], c[2] as f64 * dx[2])
    }

    /// Signed mode number of FFT bin `idx` on `axis`.
    pub fn mode(&self, axis: usize, idx: usize) -> i64 {
        let n = self.n[axis];
        if idx <= n / 2 {
            idx as i64
        } else {
            idx as i64 - n as i64
        }
    }

    pub fn is_nyquist(&self, axis: usize, idx: usize) -> bool {
        self.n[axis] % 2 == 0 && idx == self.n[axis] / 2
    }

    /// Angular wavenumbers `2 pi m / L` in FFT bin order.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        (0..self.n[axis])
            .map(|i| TAU * self.mode(axis, i) as f64 / self.l[axis])
            .collect()
    }

    /// Wavenumbers for first derivatives: the Nyquist bin is zeroed so that
    /// derivatives of real data stay real.
    pub fn derivative_wavenumbers(&self, axis: usize) -> Vec<f64> {
        let mut k = self.wavenumbers(axis);
        if self.n[axis] % 2 == 0 {
            k[self.n[axis] / 2] = 0.0;
        }
        k
    }
}

impl fmt::Display for Grid3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{}x{} on {:?}x{:?}x{:?}",
            self.n[0], self.n[1], self.n[2], self.l[0], self.l[1], self.l[2]
        )
    }
}

/// Discretization of spatial derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Spectral,
    Fd2,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Spectral => "spectral",
            Scheme::Fd2 => "fd2",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Scheme::Spectral),
            "fd2" => Ok(Scheme::Fd2),
            _ => Err(Error::BadParams(format!(
                "unknown scheme {s:?} (expected spectral or fd2)"
            ))),
        }
    }
}
