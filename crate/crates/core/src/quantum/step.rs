use num_complex::Complex64;

use super::dg::dg_potential;
use super::{DGParams, WaveFunction};
use crate::discrete::{DiffOps, GridField, ScalarField, Scheme, VectorField};
use crate::em::Vec3;
use crate::error::{Error, Result};

const BLOWUP_FACTOR: f64 = 1e6;
const CROSS_TOL: f64 = 1e-14;
const CROSS_MAX_ITERS: usize = 200;

/// Strang-split propagator for the minimally coupled (optionally
/// Doebner–Goldin) Schrödinger equation on a periodic grid.
///
/// One step is: kinetic half step in Fourier space with the mean vector
/// potential, then diffusion half step, pointwise potential, the
/// `A`-fluctuation cross term (Crank–Nicolson), diffusion half step, and the
/// second kinetic half step.
pub struct SchrodingerStepper {
    ops: DiffOps,
    dg: DGParams,
    dt: f64,
    reference_max: Option<f64>,
}

impl SchrodingerStepper {
    pub fn new(grid: &crate::discrete::Grid3, dg: DGParams, dt: f64) -> Result<Self> {
        dg.validate()?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::BadParams(format!("time step {dt} must be positive")));
        }
        Ok(Self {
            ops: DiffOps::new(grid, Scheme::Spectral),
            dg,
            dt,
            reference_max: None,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn ops(&self) -> &DiffOps {
        &self.ops
    }

    pub fn dg(&self) -> &DGParams {
        &self.dg
    }

    pub fn step(
        &mut self,
        wf: &mut WaveFunction,
        phi: Option<&ScalarField>,
        a: Option<&VectorField>,
    ) -> Result<()> {
        let grid = *self.ops.grid();
        if wf.grid != grid {
            return Err(Error::InvalidGrid("wavefunction grid differs from stepper".into()));
        }
        if let Some(p) = phi {
            p.check(&grid)?;
            p.ensure_finite("scalar potential")?;
        }
        if let Some(a) = a {
            a.check(&grid)?;
            a.ensure_finite("vector potential")?;
        }
        let reference = *self.reference_max.get_or_insert_with(|| wf.max_abs());

        let a_mean = a.map(|a| a.mean()).unwrap_or(Vec3::ZERO);
        let a_fluct = a.and_then(|a| {
            let f = a.map(|v| v - a_mean);
            (f.max_abs() > 0.0).then_some(f)
        });

        self.kinetic(wf, a_mean, 0.5 * self.dt);
        self.diffuse(wf, 0.5 * self.dt);

        let p = wf.particle;
        let mut v = dg_potential(&self.ops, wf, &self.dg)?;
        if let Some(phi) = phi {
            v.axpy(p.e, phi);
        }
        if let Some(f) = &a_fluct {
            let s = p.e * p.e / (2.0 * p.m);
            for i in 0..grid.len() {
                v[i] += s * f.get(i).norm_sq();
            }
        }
        match &a_fluct {
            None => self.potential(wf, &v, self.dt),
            Some(f) => {
                self.potential(wf, &v, 0.5 * self.dt);
                self.cross_term(wf, a_mean, f)?;
                self.potential(wf, &v, 0.5 * self.dt);
            }
        }

        self.diffuse(wf, 0.5 * self.dt);
        self.kinetic(wf, a_mean, 0.5 * self.dt);

        wf.ensure_finite()?;
        let m = wf.max_abs();
        if m > BLOWUP_FACTOR * reference {
            return Err(Error::BlowUp(m));
        }
        Ok(())
    }

    fn kinetic(&self, wf: &mut WaveFunction, a_mean: Vec3, tau: f64) {
        let p = wf.particle;
        let kn = self.ops.wavenumbers();
        let fft = self.ops.fft();
        fft.forward(&mut wf.psi);
        for (idx, c) in wf.psi.iter_mut().enumerate() {
            let k = Vec3::from_array(kn.k_full(idx));
            let q = k * p.hbar - a_mean * p.e;
            let w = q.norm_sq() / (2.0 * p.m * p.hbar);
            *c *= Complex64::from_polar(1.0, -w * tau);
        }
        fft.inverse(&mut wf.psi);
    }

    /// Evolves `rho` by the heat kernel for time `tau` and rescales the
    /// amplitude, keeping the phase.
    fn diffuse(&self, wf: &mut WaveFunction, tau: f64) {
        let d = self.dg.d;
        if d == 0.0 {
            return;
        }
        let kn = self.ops.wavenumbers();
        let fft = self.ops.fft();
        let rho: Vec<f64> = wf.psi.iter().map(|c| c.norm_sqr()).collect();
        let mut s = fft.forward_real(&rho);
        for (idx, c) in s.iter_mut().enumerate() {
            let k2: f64 = kn.k_full(idx).iter().map(|k| k * k).sum();
            *c *= (-d * k2 * tau).exp();
        }
        let new_rho = fft.inverse_real(s);
        for ((c, &r0), &r1) in wf.psi.iter_mut().zip(&rho).zip(&new_rho) {
            let r1 = r1.max(0.0);
            if r0 > 0.0 {
                *c *= (r1 / r0).sqrt();
            } else {
                *c = Complex64::new(r1.sqrt(), 0.0);
            }
        }
    }

    fn potential(&self, wf: &mut WaveFunction, v: &ScalarField, tau: f64) {
        let hbar = wf.particle.hbar;
        for (c, &vi) in wf.psi.iter_mut().zip(v.data()) {
            if vi != 0.0 {
                *c *= Complex64::from_polar(1.0, -vi * tau / hbar);
            }
        }
    }

    /// `C psi = -(e/2m)[(p - eA0).f psi + f.(p - eA0) psi]` with
    /// `p = -i hbar grad`, solved by Crank–Nicolson fixed-point iteration.
    fn cross_term(&self, wf: &mut WaveFunction, a_mean: Vec3, f: &VectorField) -> Result<()> {
        let p = wf.particle;
        let apply = |psi: &[Complex64]| -> Vec<Complex64> {
            let n = psi.len();
            let g = self.ops.grad_complex(psi);
            // div(f psi)
            let mut div = vec![Complex64::default(); n];
            for c in 0..3 {
                let fc = f.component(c);
                let prod: Vec<Complex64> = psi.iter().zip(fc).map(|(z, &w)| z * w).collect();
                let d = self.ops.grad_complex(&prod);
                for i in 0..n {
                    div[i] += d[c][i];
                }
            }
            let i_hbar = Complex64::new(0.0, p.hbar);
            (0..n)
                .map(|i| {
                    let fi = f.get(i);
                    let f_dot_grad = g[0][i] * fi.x + g[1][i] * fi.y + g[2][i] * fi.z;
                    let sym = -i_hbar * (div[i] + f_dot_grad) - psi[i] * (2.0 * p.e * a_mean.dot(fi));
                    sym * (-p.e / (2.0 * p.m))
                })
                .collect()
        };
        let half = Complex64::new(0.0, -0.5 * self.dt / p.hbar);
        let psi0 = wf.psi.clone();
        let norm0 = psi0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let mut next = psi0.clone();
        for _ in 0..CROSS_MAX_ITERS {
            let sum: Vec<Complex64> = psi0.iter().zip(&next).map(|(a, b)| a + b).collect();
            let c = apply(&sum);
            let cand: Vec<Complex64> = psi0.iter().zip(&c).map(|(z, w)| z + half * w).collect();
            let change = cand
                .iter()
                .zip(&next)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            next = cand;
            if change <= CROSS_TOL * norm0 {
                wf.psi = next;
                return Ok(());
            }
            if !change.is_finite() {
                break;
            }
        }
        Err(Error::BadParams(
            "vector-potential cross term did not converge; reduce dt".into(),
        ))
    }
}

/// One step of the coupled Schrödinger equation with optional potentials.
pub fn step_schrodinger(
    wf: &WaveFunction,
    phi: Option<&ScalarField>,
    a: Option<&VectorField>,
    dg: &DGParams,
    dt: f64,
) -> Result<WaveFunction> {
    let mut stepper = SchrodingerStepper::new(&wf.grid, *dg, dt)?;
    let mut out = wf.clone();
    stepper.step(&mut out, phi, a)?;
    Ok(out)
}
