use num_complex::Complex64;

use super::WaveFunction;
use crate::discrete::{ddt, DiffOps, GridField, Potentials, ScalarField, Scheme};
use crate::error::{Error, Result};

/// Applies the gauge function `lambda` (one sample per potential time step)
/// and returns the transformed state at sample `at` with the transformed
/// potentials: `psi' = exp(i e L / hbar) psi`, `A' = A + grad L`,
/// `phi' = phi - dL/dt`.
pub fn apply_gauge(
    wf: &WaveFunction,
    pot: &Potentials,
    lambda: &[ScalarField],
    at: usize,
) -> Result<(WaveFunction, Potentials)> {
    if lambda.len() != pot.len() {
        return Err(Error::ShapeMismatch {
            expected: pot.len(),
            got: lambda.len(),
        });
    }
    if at >= lambda.len() {
        return Err(Error::BadParams(format!(
            "sample {at} outside {} gauge samples",
            lambda.len()
        )));
    }
    if wf.grid != pot.grid {
        return Err(Error::InvalidGrid("wavefunction and potentials grids differ".into()));
    }
    for l in lambda {
        l.check(&pot.grid)?;
        l.ensure_finite("gauge function")?;
    }
    let ops = DiffOps::new(&pot.grid, Scheme::Spectral);
    let s = wf.particle.e / wf.particle.hbar;
    let psi = wf
        .psi
        .iter()
        .zip(lambda[at].data())
        .map(|(z, &l)| z * Complex64::from_polar(1.0, s * l))
        .collect();
    let dl = if lambda.len() >= 3 {
        ddt(lambda, pot.dt)?
    } else if lambda.windows(2).all(|w| w[0] == w[1]) {
        vec![ScalarField::zeros(&pot.grid); lambda.len()]
    } else {
        return Err(Error::TooFewTimeSamples {
            needed: 3,
            got: lambda.len(),
        });
    };
    let mut a = Vec::with_capacity(pot.len());
    let mut phi = Vec::with_capacity(pot.len());
    for k in 0..pot.len() {
        let mut ak = pot.a[k].clone();
        ak.axpy(1.0, &ops.grad(&lambda[k])?);
        a.push(ak);
        let mut pk = pot.phi[k].clone();
        pk.axpy(-1.0, &dl[k]);
        phi.push(pk);
    }
    Ok((
        WaveFunction::new(wf.grid, psi, wf.particle)?,
        Potentials::new(pot.grid, pot.t0, pot.dt, phi, a)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{potentials_to_fields, Grid3};
    use crate::em::Vec3;
    use crate::quantum::{densities, Particle};
    use std::f64::consts::TAU;

    fn setup() -> (WaveFunction, Potentials, Vec<ScalarField>) {
        let g = Grid3::new([48, 48, 4], [TAU, TAU, 1.0]).unwrap();
        let psi = (0..g.len())
            .map(|i| {
                let x = g.position(i);
                Complex64::from_polar((0.5 * x.x.cos() + 0.3 * x.y.sin()).exp(), x.x)
            })
            .collect();
        let mut wf = WaveFunction::new(g, psi, Particle::new(1.0, 0.7, 1.0).unwrap()).unwrap();
        wf.normalize().unwrap();
        let pot = Potentials::sample(g, 0.0, 1e-3, 5, |x, t| {
            (x.x.cos() * (1.0 + t), Vec3::new(0.2 * x.y.sin(), 0.1, (x.x + t).cos()))
        })
        .unwrap();
        let lambda: Vec<ScalarField> = (0..5)
            .map(|k| {
                let t = k as f64 * 1e-3;
                ScalarField::from_fn(&g, |x| 0.5 * (x.x).sin() * (x.y).cos() + t * x.y.sin())
            })
            .collect();
        (wf, pot, lambda)
    }

    #[test]
    fn zero_gauge_is_identity() {
        let (wf, pot, _) = setup();
        let zero = vec![ScalarField::zeros(&pot.grid); pot.len()];
        let (w2, p2) = apply_gauge(&wf, &pot, &zero, 2).unwrap();
        assert_eq!(w2, wf);
        assert_eq!(p2, pot);
    }

    #[test]
    fn densities_are_gauge_invariant() {
        let (wf, pot, lambda) = setup();
        let (w2, p2) = apply_gauge(&wf, &pot, &lambda, 2).unwrap();
        let (r1, j1) = densities(&wf, Some(&pot.a[2]), 0.05).unwrap();
        let (r2, j2) = densities(&w2, Some(&p2.a[2]), 0.05).unwrap();
        for i in 0..wf.grid.len() {
            assert!((r1[i] - r2[i]).abs() < 1e-12);
            assert!((j1.get(i) - j2.get(i)).norm() < 1e-12, "{}", (j1.get(i) - j2.get(i)).norm());
        }
    }

    #[test]
    fn fields_are_gauge_invariant() {
        let (wf, pot, lambda) = setup();
        let (_, p2) = apply_gauge(&wf, &pot, &lambda, 0).unwrap();
        let (e1, b1) = potentials_to_fields(&pot, Scheme::Spectral).unwrap();
        let (e2, b2) = potentials_to_fields(&p2, Scheme::Spectral).unwrap();
        for k in 0..pot.len() {
            let mut de = e2[k].clone();
            de.axpy(-1.0, &e1[k]);
            let mut db = b2[k].clone();
            db.axpy(-1.0, &b1[k]);
            assert!(de.max_abs() < 1e-9, "{}", de.max_abs());
            assert!(db.max_abs() < 1e-12);
        }
    }

    #[test]
    fn length_mismatch() {
        let (wf, pot, lambda) = setup();
        assert!(matches!(
            apply_gauge(&wf, &pot, &lambda[..3], 0),
            Err(Error::ShapeMismatch { .. })
        ));
    }
}
