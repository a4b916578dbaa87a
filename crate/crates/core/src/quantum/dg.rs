use serde::{Deserialize, Serialize};

use super::WaveFunction;
use crate::discrete::{DiffOps, GridField, ScalarField, Scheme, VectorField};
use crate::error::{Error, Result};

/// Coefficients of the Doebner–Goldin nonlinear terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DGParams {
    /// Diffusion coefficient `D`.
    pub d: f64,
    /// Overall coefficient `D'` of the bracket.
    pub d_prime: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
}

impl DGParams {
    pub fn linear() -> Self {
        Self::default()
    }

    pub fn coefficients(&self) -> [f64; 5] {
        [self.c1, self.c2, self.c3, self.c4, self.c5]
    }

    /// `c1 + c4 = 0` and `c3 = 0`, up to rounding of the inputs.
    pub fn galilean_subfamily(&self) -> bool {
        let scale = self.coefficients().iter().fold(1.0f64, |m, c| m.max(c.abs()));
        (self.c1 + self.c4).abs() <= 1e-12 * scale && self.c3.abs() <= 1e-12 * scale
    }

    /// True if the bracket multiplying `D'` contributes anything.
    pub fn has_bracket(&self) -> bool {
        self.d_prime != 0.0 && self.coefficients().iter().any(|&c| c != 0.0)
    }

    pub fn is_linear(&self) -> bool {
        self.d == 0.0 && !self.has_bracket()
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.d, self.d_prime, self.c1, self.c2, self.c3, self.c4, self.c5];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadParams("DG coefficients must be finite".into()));
        }
        if self.d < 0.0 {
            return Err(Error::BadParams(format!("diffusion coefficient {} is negative", self.d)));
        }
        Ok(())
    }
}

/// `Im(conj(psi) grad psi)`, computed from real and imaginary parts so that a
/// real state gives exactly zero.
pub fn phase_current(ops: &DiffOps, wf: &WaveFunction) -> Result<VectorField> {
    let re = ScalarField::from_data(wf.psi.iter().map(|c| c.re).collect());
    let im = ScalarField::from_data(wf.psi.iter().map(|c| c.im).collect());
    let gre = ops.grad(&re)?;
    let gim = ops.grad(&im)?;
    let n = wf.grid.len();
    let mut out = VectorField::zeros(&wf.grid);
    for c in 0..3 {
        let (gr, gi) = (gre.component(c), gim.component(c));
        let dst = out.component_mut(c);
        for i in 0..n {
            dst[i] = re[i] * gi[i] - im[i] * gr[i];
        }
    }
    Ok(out)
}

/// Probability density and gauge-invariant current
/// `(hbar/m) Im(conj(psi) grad psi) - D grad rho - (e/m) rho A`.
pub fn densities(
    wf: &WaveFunction,
    a: Option<&VectorField>,
    d: f64,
) -> Result<(ScalarField, VectorField)> {
    let ops = DiffOps::new(&wf.grid, Scheme::Spectral);
    densities_with(&ops, wf, a, d)
}

pub fn densities_with(
    ops: &DiffOps,
    wf: &WaveFunction,
    a: Option<&VectorField>,
    d: f64,
) -> Result<(ScalarField, VectorField)> {
    if wf.psi.len() != ops.grid().len() {
        return Err(Error::ShapeMismatch {
            expected: ops.grid().len(),
            got: wf.psi.len(),
        });
    }
    if let Some(a) = a {
        a.check(&wf.grid)?;
    }
    let p = wf.particle;
    let rho = wf.density();
    let mut j = phase_current(ops, wf)?.scaled(p.hbar / p.m);
    if d != 0.0 {
        j.axpy(-d, &ops.grad(&rho)?);
    }
    if let Some(a) = a {
        let s = p.e / p.m;
        for c in 0..3 {
            let ac = a.component(c);
            for (i, v) in j.component_mut(c).iter_mut().enumerate() {
                *v -= s * rho[i] * ac[i];
            }
        }
    }
    Ok((rho, j))
}

/// Pointwise real potential `hbar D' [c1 div(j)/rho + c2 lap(rho)/rho +
/// c3 j^2/rho^2 + c4 j.grad(rho)/rho^2 + c5 |grad rho|^2/rho^2]` with
/// `j = Im(conj(psi) grad psi)` and `rho` regularized by `1e-12 max(rho)`.
pub fn dg_potential(ops: &DiffOps, wf: &WaveFunction, dg: &DGParams) -> Result<ScalarField> {
    let n = wf.grid.len();
    if !dg.has_bracket() {
        return Ok(ScalarField::zeros(&wf.grid));
    }
    let rho = wf.density();
    let eps = 1e-12 * rho.max_abs();
    let jh = phase_current(ops, wf)?;
    let grad_rho = ops.grad(&rho)?;
    let div_j = if dg.c1 != 0.0 { Some(ops.div(&jh)?) } else { None };
    let lap_rho = if dg.c2 != 0.0 {
        Some(ops.laplacian(&rho)?)
    } else {
        None
    };
    let scale = wf.particle.hbar * dg.d_prime;
    let v = (0..n)
        .map(|i| {
            let r = rho[i] + eps;
            if r == 0.0 {
                return 0.0;
            }
            let j = jh.get(i);
            let g = grad_rho.get(i);
            let mut s = 0.0;
            if let Some(dj) = &div_j {
                s += dg.c1 * dj[i] / r;
            }
            if let Some(l) = &lap_rho {
                s += dg.c2 * l[i] / r;
            }
            s += (dg.c3 * j.norm_sq() + dg.c4 * j.dot(g) + dg.c5 * g.norm_sq()) / (r * r);
            scale * s
        })
        .collect();
    Ok(ScalarField::from_data(v))
}
