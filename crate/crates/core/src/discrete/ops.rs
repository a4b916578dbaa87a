//! Differential operators, time derivatives and spectral resampling on
//! periodic grids.

use num_complex::Complex64;

use super::field::{GridField, ScalarField, VectorField};
use super::spectral::{Fft3, Wavenumbers};
use super::{Grid3, Scheme};
use crate::em::Vec3;
use crate::error::{Error, Result};

/// Spatial operators bound to one grid and scheme.
///
/// The FFT plans are built once per `DiffOps`; resampling and the complex
/// helpers are always spectral regardless of `scheme`.
pub struct DiffOps {
    grid: Grid3,
    scheme: Scheme,
    fft: Fft3,
    kn: Wavenumbers,
}

impl DiffOps {
    pub fn new(grid: &Grid3, scheme: Scheme) -> Self {
        Self {
            grid: *grid,
            scheme,
            fft: Fft3::new(grid),
            kn: Wavenumbers::new(grid),
        }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn fft(&self) -> &Fft3 {
        &self.fft
    }

    pub fn wavenumbers(&self) -> &Wavenumbers {
        &self.kn
    }

    pub fn curl(&self, f: &VectorField) -> Result<VectorField> {
        f.check(&self.grid)?;
        match self.scheme {
            Scheme::Spectral => {
                let s = [0, 1, 2].map(|c| self.fft.forward_real(f.component(c)));
                let ik = |idx: usize, a: usize| Complex64::new(0.0, self.kn.k_deriv(idx)[a]);
                let n = self.grid.len();
                let mut out = [
                    vec![Complex64::default(); n],
                    vec![Complex64::default(); n],
                    vec![Complex64::default(); n],
                ];
                for idx in 0..n {
                    out[0][idx] = ik(idx, 1) * s[2][idx] - ik(idx, 2) * s[1][idx];
                    out[1][idx] = ik(idx, 2) * s[0][idx] - ik(idx, 0) * s[2][idx];
                    out[2][idx] = ik(idx, 0) * s[1][idx] - ik(idx, 1) * s[0][idx];
                }
                let [x, y, z] = out.map(|c| self.fft.inverse_real(c));
                VectorField::from_components(x, y, z)
            }
            Scheme::Fd2 => {
                let d = |c: usize, a: usize| self.fd_partial(f.component(c), a);
                let x = sub(&d(2, 1), &d(1, 2));
                let y = sub(&d(0, 2), &d(2, 0));
                let z = sub(&d(1, 0), &d(0, 1));
                VectorField::from_components(x, y, z)
            }
        }
    }

    pub fn div(&self, f: &VectorField) -> Result<ScalarField> {
        f.check(&self.grid)?;
        match self.scheme {
            Scheme::Spectral => {
                let s = [0, 1, 2].map(|c| self.fft.forward_real(f.component(c)));
                let out = (0..self.grid.len())
                    .map(|idx| {
                        let k = self.kn.k_deriv(idx);
                        Complex64::new(0.0, 1.0)
                            * (k[0] * s[0][idx] + k[1] * s[1][idx] + k[2] * s[2][idx])
                    })
                    .collect();
                Ok(ScalarField::from_data(self.fft.inverse_real(out)))
            }
            Scheme::Fd2 => {
                let mut acc = self.fd_partial(f.component(0), 0);
                for a in 1..3 {
                    for (o, v) in acc.iter_mut().zip(self.fd_partial(f.component(a), a)) {
                        *o += v;
                    }
                }
                Ok(ScalarField::from_data(acc))
            }
        }
    }

    pub fn grad(&self, f: &ScalarField) -> Result<VectorField> {
        f.check(&self.grid)?;
        match self.scheme {
            Scheme::Spectral => {
                let s = self.fft.forward_real(f.as_slice());
                let [x, y, z] = [0, 1, 2].map(|a| {
                    let c = s
                        .iter()
                        .enumerate()
                        .map(|(idx, v)| Complex64::new(0.0, self.kn.k_deriv(idx)[a]) * v)
                        .collect();
                    self.fft.inverse_real(c)
                });
                VectorField::from_components(x, y, z)
            }
            Scheme::Fd2 => {
                let [x, y, z] = [0, 1, 2].map(|a| self.fd_partial(f.as_slice(), a));
                VectorField::from_components(x, y, z)
            }
        }
    }

    pub fn laplacian(&self, f: &ScalarField) -> Result<ScalarField> {
        f.check(&self.grid)?;
        match self.scheme {
            Scheme::Spectral => {
                let s = self.fft.forward_real(f.as_slice());
                let c = s
                    .iter()
                    .enumerate()
                    .map(|(idx, v)| {
                        let k = self.kn.k_full(idx);
                        -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * v
                    })
                    .collect();
                Ok(ScalarField::from_data(self.fft.inverse_real(c)))
            }
            Scheme::Fd2 => {
                let n = self.grid.len();
                let dx = self.grid.dx();
                let mut out = vec![0.0; n];
                for a in 0..3 {
                    let inv = 1.0 / (dx[a] * dx[a]);
                    for (idx, o) in out.iter_mut().enumerate() {
                        let (p, m) = self.neighbors(idx, a);
                        let v = f.as_slice();
                        *o += (v[p] - 2.0 * v[idx] + v[m]) * inv;
                    }
                }
                Ok(ScalarField::from_data(out))
            }
        }
    }

    fn neighbors(&self, idx: usize, axis: usize) -> (usize, usize) {
        let n = self.grid.n();
        let mut c = self.grid.coords(idx);
        let orig = c[axis];
        c[axis] = (orig + 1) % n[axis];
        let p = self.grid.index(c[0], c[1], c[2]);
        c[axis] = (orig + n[axis] - 1) % n[axis];
        let m = self.grid.index(c[0], c[1], c[2]);
        (p, m)
    }

    fn fd_partial(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let inv = 0.5 / self.grid.dx()[axis];
        (0..f.len())
            .map(|idx| {
                let (p, m) = self.neighbors(idx, axis);
                (f[p] - f[m]) * inv
            })
            .collect()
    }

    /// Per-axis spectral phase for a shift by `offset`: `exp(-i k a)`, with
    /// `cos(k a)` in the Nyquist bin so real data stays real.
    fn shift_phases(&self, offset: Vec3) -> [Vec<Complex64>; 3] {
        [0, 1, 2].map(|a| {
            let n = self.grid.n()[a];
            self.kn.full[a]
                .iter()
                .enumerate()
                .map(|(i, &k)| {
                    if n % 2 == 0 && i == n / 2 {
                        Complex64::new((k * offset[a]).cos(), 0.0)
                    } else {
                        Complex64::from_polar(1.0, -k * offset[a])
                    }
                })
                .collect()
        })
    }

    fn apply_phases(&self, spec: &mut [Complex64], ph: &[Vec<Complex64>; 3]) {
        let [n0, n1, _] = self.grid.n();
        for (idx, v) in spec.iter_mut().enumerate() {
            let i = idx % n0;
            let j = (idx / n0) % n1;
            let k = idx / (n0 * n1);
            *v *= ph[0][i] * ph[1][j] * ph[2][k];
        }
    }

    /// Returns `g(x) = f(x - offset)` by Fourier phase multiplication.
    pub fn shift<T: GridField>(&self, f: &T, offset: Vec3) -> Result<T> {
        f.check(&self.grid)?;
        if offset == Vec3::ZERO {
            return Ok(f.clone());
        }
        let ph = self.shift_phases(offset);
        let n = self.grid.len();
        let mut out = Vec::with_capacity(f.data().len());
        for c in 0..T::COMPONENTS {
            let mut s = self.fft.forward_real(&f.data()[c * n..(c + 1) * n]);
            self.apply_phases(&mut s, &ph);
            out.extend(self.fft.inverse_real(s));
        }
        Ok(T::from_data(out))
    }

    pub fn shift_complex(&self, f: &[Complex64], offset: Vec3) -> Result<Vec<Complex64>> {
        if f.len() != self.grid.len() {
            return Err(Error::ShapeMismatch {
                expected: self.grid.len(),
                got: f.len(),
            });
        }
        let mut s = f.to_vec();
        if offset == Vec3::ZERO {
            return Ok(s);
        }
        self.fft.forward(&mut s);
        let ph = self.shift_phases(offset);
        self.apply_phases(&mut s, &ph);
        self.fft.inverse(&mut s);
        Ok(s)
    }

    /// Spectral gradient of complex data.
    pub fn grad_complex(&self, f: &[Complex64]) -> [Vec<Complex64>; 3] {
        let mut s = f.to_vec();
        self.fft.forward(&mut s);
        [0, 1, 2].map(|a| {
            let mut d: Vec<Complex64> = s
                .iter()
                .enumerate()
                .map(|(idx, v)| Complex64::new(0.0, self.kn.k_deriv(idx)[a]) * v)
                .collect();
            self.fft.inverse(&mut d);
            d
        })
    }

    /// Fraction of spectral amplitude in the upper third of the resolved
    /// band; a cheap estimate of resampling error for non-band-limited data.
    pub fn spectral_tail(&self, f: &[f64]) -> f64 {
        let s = self.fft.forward_real(f);
        let n = self.grid.n();
        let (mut hi, mut total) = (0.0, 0.0);
        for (idx, v) in s.iter().enumerate() {
            let c = self.grid.coords(idx);
            let p = v.norm_sqr();
            total += p;
            if (0..3).any(|a| 3 * self.grid.mode(a, c[a]).unsigned_abs() as usize > n[a] && n[a] > 4) {
                hi += p;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            (hi / total).sqrt()
        }
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn curl(f: &VectorField, grid: &Grid3, scheme: Scheme) -> Result<VectorField> {
    DiffOps::new(grid, scheme).curl(f)
}

pub fn div(f: &VectorField, grid: &Grid3, scheme: Scheme) -> Result<ScalarField> {
    DiffOps::new(grid, scheme).div(f)
}

pub fn grad(f: &ScalarField, grid: &Grid3, scheme: Scheme) -> Result<VectorField> {
    DiffOps::new(grid, scheme).grad(f)
}

pub fn laplacian(f: &ScalarField, grid: &Grid3, scheme: Scheme) -> Result<ScalarField> {
    DiffOps::new(grid, scheme).laplacian(f)
}

pub fn resample_shifted<T: GridField>(f: &T, grid: &Grid3, offset: Vec3) -> Result<T> {
    DiffOps::new(grid, Scheme::Spectral).shift(f, offset)
}

/// Time derivative of a uniformly sampled series: centered differences in
/// the interior, second-order one-sided stencils at both ends.
pub fn ddt<T: GridField>(series: &[T], dt: f64) -> Result<Vec<T>> {
    let nt = series.len();
    if nt < 3 {
        return Err(Error::TooFewTimeSamples { needed: 3, got: nt });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::BadParams(format!("time step {dt} must be positive")));
    }
    let len = series[0].data().len();
    if let Some(bad) = series.iter().find(|s| s.data().len() != len) {
        return Err(Error::ShapeMismatch {
            expected: len,
            got: bad.data().len(),
        });
    }
    let inv = 0.5 / dt;
    let combo = |w: [(usize, f64); 3]| -> T {
        let data = (0..len)
            .map(|p| {
                let s: f64 = w.iter().map(|&(k, c)| c * series[k].data()[p]).sum();
                s * inv
            })
            .collect();
        T::from_data(data)
    };
    let mut out = Vec::with_capacity(nt);
    out.push(combo([(0, -3.0), (1, 4.0), (2, -1.0)]));
    for k in 1..nt - 1 {
        out.push(combo([(k + 1, 1.0), (k - 1, -1.0), (k, 0.0)]));
    }
    out.push(combo([(nt - 1, 3.0), (nt - 2, -4.0), (nt - 3, 1.0)]));
    Ok(out)
}
