//! Three-dimensional complex FFTs assembled from one-dimensional rustfft
//! plans, plus the Fourier-space multipliers used by the grid operators.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Grid3;

pub struct Fft3 {
    n: [usize; 3],
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
}

impl Fft3 {
    pub fn new(grid: &Grid3) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let fwd = n.map(|len| planner.plan_fft_forward(len));
        let inv = n.map(|len| planner.plan_fft_inverse(len));
        Self { n, fwd, inv }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.fwd);
    }

    /// Inverse transform including the `1/N` normalization.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inv);
        let scale = 1.0 / data.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn run(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 3]) {
        let [n0, n1, n2] = self.n;
        assert_eq!(data.len(), n0 * n1 * n2);
        let scratch_len = plans
            .iter()
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        let mut scratch = vec![Complex64::default(); scratch_len];

        // x lines are contiguous
        plans[0].process_with_scratch(data, &mut scratch);

        let mut line = vec![Complex64::default(); n1.max(n2)];
        for k in 0..n2 {
            for i in 0..n0 {
                let base = i + n0 * n1 * k;
                for j in 0..n1 {
                    line[j] = data[base + n0 * j];
                }
                plans[1].process_with_scratch(&mut line[..n1], &mut scratch);
                for j in 0..n1 {
                    data[base + n0 * j] = line[j];
                }
            }
        }
        let stride = n0 * n1;
        for base in 0..stride {
            for k in 0..n2 {
                line[k] = data[base + stride * k];
            }
            plans[2].process_with_scratch(&mut line[..n2], &mut scratch);
            for k in 0..n2 {
                data[base + stride * k] = line[k];
            }
        }
    }

    pub fn forward_real(&self, data: &[f64]) -> Vec<Complex64> {
        let mut c: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut c);
        c
    }

    /// Inverse transform keeping only the real part.
    pub fn inverse_real(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.inverse(&mut spec);
        spec.into_iter().map(|c| c.re).collect()
    }
}

/// Per-axis wavenumber tables for one grid.
pub struct Wavenumbers {
    /// First-derivative wavenumbers (Nyquist zeroed).
    pub deriv: [Vec<f64>; 3],
    /// Full wavenumbers including the Nyquist bin.
    pub full: [Vec<f64>; 3],
    n: [usize; 3],
}

impl Wavenumbers {
    pub fn new(grid: &Grid3) -> Self {
        Self {
            deriv: [0, 1, 2].map(|a| grid.derivative_wavenumbers(a)),
            full: [0, 1, 2].map(|a| grid.wavenumbers(a)),
            n: grid.n(),
        }
    }

    /// First-derivative wave vector at flat spectral index `idx`.
    pub fn k_deriv(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.coords(idx);
        [self.deriv[0][i], self.deriv[1][j], self.deriv[2][k]]
    }

    pub fn k_full(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.coords(idx);
        [self.full[0][i], self.full[1][j], self.full[2][k]]
    }

    /// True if any axis index of `idx` is an even-length Nyquist bin.
    pub fn touches_nyquist(&self, idx: usize) -> bool {
        let c = self.coords(idx);
        (0..3).any(|a| self.n[a] % 2 == 0 && c[a] == self.n[a] / 2)
    }

    fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.n[0];
        let j = (idx / self.n[0]) % self.n[1];
        let k = idx / (self.n[0] * self.n[1]);
        [i, j, k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_after_forward_is_identity() {
        let g = Grid3::new([8, 6, 5], [1.0, 2.0, 3.0]).unwrap();
        let data: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let fft = Fft3::new(&g);
        let mut work = data.clone();
        fft.forward(&mut work);
        fft.inverse(&mut work);
        let err = work
            .iter()
            .zip(&data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(err < 1e-13, "roundtrip error {err}");
    }

    #[test]
    fn single_mode_lands_in_its_bin() {
        let g = Grid3::new([8, 4, 4], [1.0; 3]).unwrap();
        let fft = Fft3::new(&g);
        let spec = fft.forward_real(
            &(0..g.len())
                .map(|i| (std::f64::consts::TAU * g.position(i).y).cos())
                .collect::<Vec<_>>(),
        );
        for (idx, c) in spec.iter().enumerate() {
            let [i, j, k] = g.coords(idx);
            let expect = if i == 0 && k == 0 && (j == 1 || j == 3) {
                g.len() as f64 / 2.0
            } else {
                0.0
            };
            assert!((c.re - expect).abs() < 1e-12 && c.im.abs() < 1e-12);
        }
    }
}
