use num_complex::Complex64;

use crate::discrete::{DiffOps, Grid3, GridField, ScalarField, Scheme, VectorField};
use crate::em::Constants;
use crate::error::{Error, Result};

const SOLVABILITY_TOL: f64 = 1e-10;

fn inverse_k2(ops: &DiffOps, idx: usize) -> Option<([f64; 3], f64)> {
    let k = ops.wavenumbers().k_deriv(idx);
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    (k2 > 0.0).then(|| (k, 1.0 / k2))
}

/// Coulomb-gauge potentials of the given sources: `lap phi = -rho/eps0` and
/// `lap A = -mu0 j_T`, where `j_T` is the divergence-free, zero-mean part of
/// `j`. Unresolvable modes (mean, Nyquist) are set to zero.
pub fn coulomb_potentials(
    ops: &DiffOps,
    rho: &ScalarField,
    j: &VectorField,
    k: &Constants,
) -> Result<(ScalarField, VectorField)> {
    let grid = *ops.grid();
    rho.check(&grid)?;
    j.check(&grid)?;
    let fft = ops.fft();
    let mut phi = fft.forward_real(rho.as_slice());
    let mut js = [0, 1, 2].map(|c| fft.forward_real(j.component(c)));
    for idx in 0..grid.len() {
        match inverse_k2(ops, idx) {
            Some((kv, inv)) => {
                phi[idx] *= inv / k.eps0();
                let kj = js[0][idx] * kv[0] + js[1][idx] * kv[1] + js[2][idx] * kv[2];
                for c in 0..3 {
                    js[c][idx] = (js[c][idx] - kj * (kv[c] * inv)) * (k.mu0() * inv);
                }
            }
            None => {
                phi[idx] = Complex64::default();
                for s in &mut js {
                    s[idx] = Complex64::default();
                }
            }
        }
    }
    let phi = ScalarField::from_data(fft.inverse_real(phi));
    let [ax, ay, az] = js.map(|s| fft.inverse_real(s));
    Ok((phi, VectorField::from_components(ax, ay, az)?))
}

fn check_solvable(rho: &ScalarField, j: &VectorField, ops: &DiffOps) -> Result<()> {
    let rho_scale = rho.max_abs().max(1.0);
    let mean = rho.mean();
    if mean.abs() > SOLVABILITY_TOL * rho_scale {
        return Err(Error::NonNeutralCharge(mean));
    }
    let j_scale = j.max_abs().max(1.0);
    let jm = j.mean();
    if jm.max_abs() > SOLVABILITY_TOL * j_scale {
        return Err(Error::NonZeroMeanCurrent(jm.to_array()));
    }
    let div = ops.div(j)?.max_abs();
    if div > SOLVABILITY_TOL * j_scale {
        return Err(Error::NonSolenoidalCurrent(div));
    }
    Ok(())
}

/// Static fields of the magnetic limit on the torus: `E = -grad phi` with
/// `lap phi = -rho/eps0` and `B = curl Psi` with `lap Psi = -mu0 j`.
pub fn solve_magnetic_limit(
    rho: &ScalarField,
    j: &VectorField,
    grid: &Grid3,
    k: &Constants,
) -> Result<(VectorField, VectorField)> {
    rho.check(grid)?;
    j.check(grid)?;
    rho.ensure_finite("rho")?;
    j.ensure_finite("j")?;
    let ops = DiffOps::new(grid, Scheme::Spectral);
    check_solvable(rho, j, &ops)?;
    let (phi, a) = coulomb_potentials(&ops, rho, j, k)?;
    fields_from_static_potentials(&ops, &phi, &a)
}

/// `E = -grad phi`, `B = curl A`.
pub fn fields_from_static_potentials(
    ops: &DiffOps,
    phi: &ScalarField,
    a: &VectorField,
) -> Result<(VectorField, VectorField)> {
    Ok((ops.grad(phi)?.scaled(-1.0), ops.curl(a)?))
}

/// Removes the mean and longitudinal part of `j`.
pub fn transverse_part(ops: &DiffOps, j: &VectorField) -> Result<VectorField> {
    let grid = *ops.grid();
    j.check(&grid)?;
    let fft = ops.fft();
    let mut js = [0, 1, 2].map(|c| fft.forward_real(j.component(c)));
    for idx in 0..grid.len() {
        match inverse_k2(ops, idx) {
            Some((kv, inv)) => {
                let kj = js[0][idx] * kv[0] + js[1][idx] * kv[1] + js[2][idx] * kv[2];
                for c in 0..3 {
                    js[c][idx] -= kj * (kv[c] * inv);
                }
            }
            None => {
                for s in &mut js {
                    s[idx] = Complex64::default();
                }
            }
        }
    }
    let [x, y, z] = js.map(|s| fft.inverse_real(s));
    VectorField::from_components(x, y, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::FieldHistory;
    use crate::em::Vec3;
    use crate::residuals::magnetic_limit_residuals;
    use std::f64::consts::TAU;

    fn grid() -> Grid3 {
        Grid3::new([32, 8, 8], [TAU, TAU, TAU]).unwrap()
    }

    #[test]
    fn zero_sources_give_zero_fields() {
        let g = grid();
        let (e, b) = solve_magnetic_limit(
            &ScalarField::zeros(&g),
            &VectorField::zeros(&g),
            &g,
            &Constants::unit(),
        )
        .unwrap();
        assert_eq!(e.max_abs(), 0.0);
        assert_eq!(b.max_abs(), 0.0);
    }

    #[test]
    fn single_mode_charge() {
        let g = grid();
        let k = Constants::new(2.5, 0.4).unwrap();
        let rho = ScalarField::from_fn(&g, |x| k.eps0() * x.x.sin());
        let (e, b) = solve_magnetic_limit(&rho, &VectorField::zeros(&g), &g, &k).unwrap();
        for i in 0..g.len() {
            let want = Vec3::new(-g.position(i).x.cos(), 0.0, 0.0);
            assert!((e.get(i) - want).norm() < 1e-12);
        }
        assert!(b.max_abs() < 1e-14);
    }

    #[test]
    fn single_mode_current() {
        let g = grid();
        let k = Constants::new(2.5, 0.4).unwrap();
        let j = VectorField::from_fn(&g, |x| Vec3::new(0.0, 0.0, x.x.sin() / k.mu0()));
        let (e, b) = solve_magnetic_limit(&ScalarField::zeros(&g), &j, &g, &k).unwrap();
        for i in 0..g.len() {
            let want = Vec3::new(0.0, -g.position(i).x.cos(), 0.0);
            assert!((b.get(i) - want).norm() < 1e-12);
        }
        assert!(e.max_abs() < 1e-14);
    }

    #[test]
    fn outputs_satisfy_magnetic_limit() {
        let g = grid();
        let k = Constants::new(0.7, 1.9).unwrap();
        let rho = ScalarField::from_fn(&g, |x| (x.x + 2.0 * x.y).cos() - 0.5 * x.z.sin());
        // j = curl of a smooth field is solenoidal with zero mean
        let w = VectorField::from_fn(&g, |x| {
            Vec3::new(x.y.sin(), (x.z + x.x).cos(), (2.0 * x.x).sin() * x.y.cos())
        });
        let j = DiffOps::new(&g, Scheme::Spectral).curl(&w).unwrap();
        let (e, b) = solve_magnetic_limit(&rho, &j, &g, &k).unwrap();
        let mut h = FieldHistory::from_eb(g, 0.0, 1.0, vec![e; 3], vec![b; 3]).unwrap();
        h.rho = Some(vec![rho; 3]);
        h.j = Some(vec![j; 3]);
        let r = magnetic_limit_residuals(&h, &k, Scheme::Spectral).unwrap();
        for (name, n) in r.entries() {
            assert!(n.max() < 1e-11, "{name}: {n:?}");
        }
    }

    #[test]
    fn rejects_unsolvable_inputs() {
        let g = grid();
        let k = Constants::unit();
        let z = VectorField::zeros(&g);
        let charged = ScalarField::constant(&g, 1.0);
        assert!(matches!(
            solve_magnetic_limit(&charged, &z, &g, &k),
            Err(Error::NonNeutralCharge(_))
        ));
        let compressive = VectorField::from_fn(&g, |x| Vec3::new(x.x.sin(), 0.0, 0.0));
        assert!(matches!(
            solve_magnetic_limit(&ScalarField::zeros(&g), &compressive, &g, &k),
            Err(Error::NonSolenoidalCurrent(_))
        ));
        let uniform = VectorField::uniform(&g, Vec3::new(0.0, 1.0, 0.0));
        assert!(matches!(
            solve_magnetic_limit(&ScalarField::zeros(&g), &uniform, &g, &k),
            Err(Error::NonZeroMeanCurrent(_))
        ));
    }

    #[test]
    fn transverse_projection_is_divergence_free() {
        let g = grid();
        let ops = DiffOps::new(&g, Scheme::Spectral);
        let j = VectorField::from_fn(&g, |x| Vec3::new(x.x.sin() + 0.3, x.y.cos() * x.x.sin(), 1.0));
        let t = transverse_part(&ops, &j).unwrap();
        assert!(ops.div(&t).unwrap().max_abs() < 1e-12);
        assert!(t.mean().norm() < 1e-14);
    }
}
