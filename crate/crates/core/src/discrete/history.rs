use serde::{Deserialize, Serialize};

use super::field::{GridField, ScalarField, VectorField};
use super::ops::{ddt, DiffOps};
use super::{Grid3, Scheme};
use crate::em::Vec3;
use crate::error::{Error, Result};

/// Provenance attached to a history.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HistoryMeta {
    pub law: Option<String>,
    pub notes: Vec<String>,
    /// Estimated resampling error introduced by transport, if any.
    pub interpolation_error: Option<f64>,
}

/// Fields and sources sampled on a periodic grid at uniform times
/// `t0, t0 + dt, ...`.
///
/// `E` and `B` are always present; `D`, `H`, `rho` and `j` may be filled in
/// later (e.g. by source synthesis).
#[derive(Clone, Debug, PartialEq)]
pub struct FieldHistory {
    pub grid: Grid3,
    pub t0: f64,
    pub dt: f64,
    pub e: Vec<VectorField>,
    pub b: Vec<VectorField>,
    pub d: Option<Vec<VectorField>>,
    pub h: Option<Vec<VectorField>>,
    pub rho: Option<Vec<ScalarField>>,
    pub j: Option<Vec<VectorField>>,
    pub meta: HistoryMeta,
}

fn check_series<T: GridField>(grid: &Grid3, nt: usize, s: &[T]) -> Result<()> {
    if s.len() != nt {
        return Err(Error::ShapeMismatch {
            expected: nt,
            got: s.len(),
        });
    }
    s.iter().try_for_each(|f| f.check(grid))
}

impl FieldHistory {
    pub fn from_eb(
        grid: Grid3,
        t0: f64,
        dt: f64,
        e: Vec<VectorField>,
        b: Vec<VectorField>,
    ) -> Result<Self> {
        let h = Self {
            grid,
            t0,
            dt,
            e,
            b,
            d: None,
            h: None,
            rho: None,
            j: None,
            meta: HistoryMeta::default(),
        };
        h.validate()?;
        Ok(h)
    }

    /// Samples `(E, B)` from a closure of position and time.
    pub fn sample_eb(
        grid: Grid3,
        t0: f64,
        dt: f64,
        steps: usize,
        f: impl Fn(Vec3, f64) -> (Vec3, Vec3),
    ) -> Result<Self> {
        let mut e = Vec::with_capacity(steps);
        let mut b = Vec::with_capacity(steps);
        for k in 0..steps {
            let t = t0 + k as f64 * dt;
            e.push(VectorField::from_fn(&grid, |x| f(x, t).0));
            b.push(VectorField::from_fn(&grid, |x| f(x, t).1));
        }
        Self::from_eb(grid, t0, dt, e, b)
    }

    pub fn validate(&self) -> Result<()> {
        let nt = self.e.len();
        if nt == 0 {
            return Err(Error::TooFewTimeSamples { needed: 1, got: 0 });
        }
        if !(self.dt.is_finite() && self.dt > 0.0 && self.t0.is_finite()) {
            return Err(Error::BadParams(format!(
                "time axis t0 = {}, dt = {} is invalid",
                self.t0, self.dt
            )));
        }
        check_series(&self.grid, nt, &self.e)?;
        check_series(&self.grid, nt, &self.b)?;
        if let Some(s) = &self.d {
            check_series(&self.grid, nt, s)?;
        }
        if let Some(s) = &self.h {
            check_series(&self.grid, nt, s)?;
        }
        if let Some(s) = &self.rho {
            check_series(&self.grid, nt, s)?;
        }
        if let Some(s) = &self.j {
            check_series(&self.grid, nt, s)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn require_dh(&self) -> Result<(&[VectorField], &[VectorField])> {
        Ok((
            self.d.as_deref().ok_or(Error::IncompleteHistory("D"))?,
            self.h.as_deref().ok_or(Error::IncompleteHistory("H"))?,
        ))
    }

    pub fn require_sources(&self) -> Result<(&[ScalarField], &[VectorField])> {
        Ok((
            self.rho.as_deref().ok_or(Error::IncompleteHistory("rho"))?,
            self.j.as_deref().ok_or(Error::IncompleteHistory("j"))?,
        ))
    }

    /// True when every frame matches the first up to roundoff.
    pub fn is_static(&self) -> bool {
        fn same<T: GridField>(s: Option<&[T]>) -> bool {
            s.is_none_or(|s| {
                let tol = 1e-12 * s[0].max_abs().max(1.0);
                s.iter().all(|f| {
                    f.data()
                        .iter()
                        .zip(s[0].data())
                        .all(|(a, b)| (a - b).abs() <= tol)
                })
            })
        }
        same(Some(&self.e))
            && same(Some(&self.b))
            && same(self.d.as_deref())
            && same(self.h.as_deref())
            && same(self.rho.as_deref())
            && same(self.j.as_deref())
    }
}

/// Scalar and vector potentials on the same time axis as a history.
#[derive(Clone, Debug, PartialEq)]
pub struct Potentials {
    pub grid: Grid3,
    pub t0: f64,
    pub dt: f64,
    pub phi: Vec<ScalarField>,
    pub a: Vec<VectorField>,
}

impl Potentials {
    pub fn new(
        grid: Grid3,
        t0: f64,
        dt: f64,
        phi: Vec<ScalarField>,
        a: Vec<VectorField>,
    ) -> Result<Self> {
        check_series(&grid, phi.len(), &phi)?;
        check_series(&grid, phi.len(), &a)?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::BadParams(format!("time step {dt} must be positive")));
        }
        Ok(Self {
            grid,
            t0,
            dt,
            phi,
            a,
        })
    }

    pub fn sample(
        grid: Grid3,
        t0: f64,
        dt: f64,
        steps: usize,
        f: impl Fn(Vec3, f64) -> (f64, Vec3),
    ) -> Result<Self> {
        let mut phi = Vec::with_capacity(steps);
        let mut a = Vec::with_capacity(steps);
        for k in 0..steps {
            let t = t0 + k as f64 * dt;
            phi.push(ScalarField::from_fn(&grid, |x| f(x, t).0));
            a.push(VectorField::from_fn(&grid, |x| f(x, t).1));
        }
        Self::new(grid, t0, dt, phi, a)
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

/// `B = curl A`, `E = -dA/dt - grad phi` at every time sample.
pub fn potentials_to_fields(
    p: &Potentials,
    scheme: Scheme,
) -> Result<(Vec<VectorField>, Vec<VectorField>)> {
    let da = ddt(&p.a, p.dt)?;
    let ops = DiffOps::new(&p.grid, scheme);
    let mut e = Vec::with_capacity(p.len());
    let mut b = Vec::with_capacity(p.len());
    for k in 0..p.len() {
        let mut ek = ops.grad(&p.phi[k])?;
        ek.axpy(1.0, &da[k]);
        e.push(ek.scaled(-1.0));
        b.push(ops.curl(&p.a[k])?);
    }
    Ok((e, b))
}

impl FieldHistory {
    pub fn from_potentials(p: &Potentials, scheme: Scheme) -> Result<Self> {
        let (e, b) = potentials_to_fields(p, scheme)?;
        Self::from_eb(p.grid, p.t0, p.dt, e, b)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;

    #[test]
    fn static_vector_potential_gives_pure_curl() {
        let g = Grid3::new([16, 4, 4], [TAU, 1.0, 1.0]).unwrap();
        let p = Potentials::sample(g, 0.0, 0.1, 3, |x, _| {
            (0.0, Vec3::new(0.0, x.x.sin(), 0.0))
        })
        .unwrap();
        let (e, b) = potentials_to_fields(&p, Scheme::Spectral).unwrap();
        for k in 0..3 {
            assert!(e[k].max_abs() < 1e-14);
            for i in 0..g.len() {
                let want = Vec3::new(0.0, 0.0, g.position(i).x.cos());
                assert!((b[k].get(i) - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn oscillating_potential() {
        // A = (0, sin(2 pi x / L), 0) cos(w t)
        let l = 2.0;
        let w = 1.5;
        let dt = 1e-4;
        let g = Grid3::new([16, 4, 4], [l, 1.0, 1.0]).unwrap();
        let p = Potentials::sample(g, 0.3, dt, 5, |x, t| {
            (0.0, Vec3::new(0.0, (TAU * x.x / l).sin() * (w * t).cos(), 0.0))
        })
        .unwrap();
        let (e, b) = potentials_to_fields(&p, Scheme::Spectral).unwrap();
        for k in 1..4 {
            let t = p.t0 + k as f64 * dt;
            for i in 0..g.len() {
                let x = g.position(i).x;
                let ew = Vec3::new(0.0, w * (TAU * x / l).sin() * (w * t).sin(), 0.0);
                let bw = Vec3::new(0.0, 0.0, (TAU / l) * (TAU * x / l).cos() * (w * t).cos());
                assert!((e[k].get(i) - ew).norm() < 1e-8);
                assert!((b[k].get(i) - bw).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn too_few_samples() {
        let g = Grid3::cube(4, 1.0).unwrap();
        let p = Potentials::sample(g, 0.0, 0.1, 2, |_, _| (0.0, Vec3::ZERO)).unwrap();
        assert!(matches!(
            potentials_to_fields(&p, Scheme::Spectral),
            Err(Error::TooFewTimeSamples { .. })
        ));
    }

    #[test]
    fn validation_catches_mismatched_lengths() {
        let g = Grid3::cube(4, 1.0).unwrap();
        let e = vec![VectorField::zeros(&g); 3];
        let b = vec![VectorField::zeros(&g); 2];
        assert!(FieldHistory::from_eb(g, 0.0, 1.0, e.clone(), b).is_err());
        assert!(FieldHistory::from_eb(g, 0.0, 0.0, e.clone(), e.clone()).is_err());
        let h = FieldHistory::from_eb(g, 0.0, 1.0, e.clone(), e).unwrap();
        assert!(h.is_static());
        assert!(matches!(h.require_dh(), Err(Error::IncompleteHistory("D"))));
    }
}
