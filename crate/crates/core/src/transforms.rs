//! Frame transformations of point fields, sources, potentials,
//! wavefunctions and whole gridded histories.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrete::{
    cross_const, DiffOps, FieldHistory, Grid3, GridField, Potentials, ScalarField, Scheme,
    VectorField,
};
use crate::em::{Constants, PointEMField, SourceDensity, Vec3};
use crate::error::{Error, Result};
use crate::quantum::WaveFunction;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoostKind {
    #[default]
    Galilean,
    Lorentz,
}

impl std::str::FromStr for BoostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "galilean" => Ok(Self::Galilean),
            "lorentz" => Ok(Self::Lorentz),
            other => Err(Error::BadParams(format!("unknown boost kind {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoostParams {
    pub v: Vec3,
    pub kind: BoostKind,
    /// Needed for Lorentz boosts.
    pub k: Option<Constants>,
}

impl BoostParams {
    pub fn galilean(v: Vec3) -> Self {
        Self {
            v,
            kind: BoostKind::Galilean,
            k: None,
        }
    }

    pub fn lorentz(v: Vec3, k: Constants) -> Self {
        Self {
            v,
            kind: BoostKind::Lorentz,
            k: Some(k),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.v.is_finite() {
            return Err(Error::NonFinite("boost velocity"));
        }
        if self.kind == BoostKind::Lorentz {
            let k = self
                .k
                .ok_or_else(|| Error::BadParams("Lorentz boost needs constants".into()))?;
            check_subluminal(self.v, &k)?;
        }
        Ok(())
    }
}

fn check_subluminal(v: Vec3, k: &Constants) -> Result<()> {
    let speed = v.norm();
    if speed >= k.c() {
        return Err(Error::SuperluminalBoost { speed, c: k.c() });
    }
    Ok(())
}

/// `E' = E + v x B`, `B' = B`, `H' = H - v x D`, `D' = D`, `j' = j - rho v`,
/// `rho' = rho`.
pub fn galilean_boost_event(
    f: &PointEMField,
    s: &SourceDensity,
    v: Vec3,
) -> (PointEMField, SourceDensity) {
    (
        PointEMField {
            e: f.e + v.cross(f.b),
            b: f.b,
            d: f.d,
            h: f.h - v.cross(f.d),
        },
        SourceDensity {
            rho: s.rho,
            j: s.j - v * s.rho,
        },
    )
}

pub fn lorentz_boost_event(
    f: &PointEMField,
    s: &SourceDensity,
    v: Vec3,
    k: &Constants,
) -> Result<(PointEMField, SourceDensity)> {
    if !v.is_finite() {
        return Err(Error::NonFinite("boost velocity"));
    }
    check_subluminal(v, k)?;
    f.ensure_finite()?;
    s.ensure_finite()?;
    let speed = v.norm();
    if speed == 0.0 {
        return Ok((*f, *s));
    }
    let n = v / speed;
    let ic2 = k.inv_c2();
    let gamma = 1.0 / (1.0 - speed * speed * ic2).sqrt();
    let par = |x: Vec3| n * n.dot(x);
    let mix = |x: Vec3, extra: Vec3| {
        let p = par(x);
        p + (x - p + extra) * gamma
    };
    let field = PointEMField {
        e: mix(f.e, v.cross(f.b)),
        b: mix(f.b, -v.cross(f.e) * ic2),
        h: mix(f.h, -v.cross(f.d)),
        d: mix(f.d, v.cross(f.h) * ic2),
    };
    let jp = par(s.j);
    let src = SourceDensity {
        j: (s.j - jp) + (jp - v * s.rho) * gamma,
        rho: gamma * (s.rho - v.dot(s.j) * ic2),
    };
    Ok((field, src))
}

pub fn boost_event(
    f: &PointEMField,
    s: &SourceDensity,
    p: &BoostParams,
) -> Result<(PointEMField, SourceDensity)> {
    p.validate()?;
    match p.kind {
        BoostKind::Galilean => Ok(galilean_boost_event(f, s, p.v)),
        BoostKind::Lorentz => lorentz_boost_event(f, s, p.v, p.k.as_ref().expect("validated")),
    }
}

/// Source law of the magnetic limit: `j' = j`, `rho' = rho - eps0 mu0 v.j`.
pub fn magnetic_limit_boost_sources(s: &SourceDensity, v: Vec3, k: &Constants) -> SourceDensity {
    SourceDensity {
        rho: s.rho - k.eps0() * k.mu0() * v.dot(s.j),
        j: s.j,
    }
}

/// `A' = A`, `phi' = phi - v.A`.
pub fn boost_potentials(phi: f64, a: Vec3, v: Vec3) -> (f64, Vec3) {
    (phi - v.dot(a), a)
}

/// Unweighted L2 distance between the Lorentz and Galilean images of
/// `(f, s)` for each light speed in `c_values`.
pub fn limit_gap(
    f: &PointEMField,
    s: &SourceDensity,
    v: Vec3,
    c_values: &[f64],
) -> Result<Vec<f64>> {
    let (gf, gs) = galilean_boost_event(f, s, v);
    c_values
        .iter()
        .map(|&c| {
            let k = Constants::with_c(c)?;
            let (lf, ls) = lorentz_boost_event(f, s, v, &k)?;
            let sq: f64 = lf
                .components()
                .iter()
                .zip(gf.components())
                .chain(ls.components().iter().zip(gs.components()))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            Ok(sq.sqrt())
        })
        .collect()
}

/// Boosted potentials in the moving frame on the same grid and time axis:
/// `A'(x', t) = A(x' + v t, t)` and `phi' = phi - v.A` at the same points.
pub fn boost_potential_history(p: &Potentials, v: Vec3) -> Result<Potentials> {
    let ops = DiffOps::new(&p.grid, Scheme::Spectral);
    let frames: Vec<(ScalarField, VectorField)> = (0..p.len())
        .into_par_iter()
        .map(|k| -> Result<_> {
            let off = -(v * (p.t0 + k as f64 * p.dt));
            let a = ops.shift(&p.a[k], off)?;
            let mut phi = ops.shift(&p.phi[k], off)?;
            for i in 0..p.grid.len() {
                phi[i] -= v.dot(a.get(i));
            }
            Ok((phi, a))
        })
        .collect::<Result<_>>()?;
    let (phi, a) = frames.into_iter().unzip();
    Potentials::new(p.grid, p.t0, p.dt, phi, a)
}

/// Checks that `m v_i L_i / (2 pi hbar)` is an integer on every axis and
/// returns the exact lattice velocity.
pub fn lattice_velocity(grid: &Grid3, v: Vec3, m: f64, hbar: f64) -> Result<Vec3> {
    let l = grid.lengths();
    let mut out = [0.0; 3];
    for a in 0..3 {
        let ratio = m * v[a] * l[a] / (TAU * hbar);
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 * ratio.abs().max(1.0) {
            return Err(Error::NonPeriodicPhase { axis: a, ratio });
        }
        out[a] = n * TAU * hbar / (m * l[a]);
    }
    Ok(Vec3::from_array(out))
}

/// `psi'(x, t) = exp(i m (v.x - |v|^2 t / 2) / hbar) psi(x - v t, t)`.
pub fn boost_wavefunction(wf: &WaveFunction, v: Vec3, t: f64) -> Result<WaveFunction> {
    if !(v.is_finite() && t.is_finite()) {
        return Err(Error::NonFinite("boost velocity or time"));
    }
    if v == Vec3::ZERO {
        return Ok(wf.clone());
    }
    let p = wf.particle;
    let v = lattice_velocity(&wf.grid, v, p.m, p.hbar)?;
    let ops = DiffOps::new(&wf.grid, Scheme::Spectral);
    let shifted = ops.shift_complex(&wf.psi, v * t)?;
    let q = v * (p.m / p.hbar);
    let w = 0.5 * p.m * v.norm_sq() * t / p.hbar;
    let psi = shifted
        .into_iter()
        .enumerate()
        .map(|(i, z)| z * Complex64::from_polar(1.0, q.dot(wf.grid.position(i)) - w))
        .collect();
    WaveFunction::new(wf.grid, psi, p)
}

fn shift_series<T: GridField + Send + Sync>(
    ops: &DiffOps,
    series: &[T],
    offsets: &[Vec3],
) -> Result<Vec<T>> {
    series
        .par_iter()
        .zip(offsets.par_iter())
        .map(|(f, &o)| ops.shift(f, o))
        .collect()
}

fn add_cross(base: &[VectorField], v: Vec3, other: &[VectorField], sign: f64) -> Vec<VectorField> {
    base.iter()
        .zip(other)
        .map(|(f, o)| {
            let mut out = f.clone();
            out.axpy(sign, &cross_const(v, o));
            out
        })
        .collect()
}

fn transport_error(ops: &DiffOps, hist: &FieldHistory) -> f64 {
    let mut err = 0.0f64;
    let mut consider = |data: &[f64]| {
        let n = hist.grid.len();
        for c in data.chunks(n) {
            err = err.max(ops.spectral_tail(c));
        }
    };
    consider(hist.e[0].data());
    consider(hist.b[0].data());
    if let Some(d) = &hist.d {
        consider(d[0].data());
    }
    if let Some(h) = &hist.h {
        consider(h[0].data());
    }
    if let Some(r) = &hist.rho {
        consider(r[0].data());
    }
    if let Some(j) = &hist.j {
        consider(j[0].data());
    }
    err
}

/// Traveling solution generated from `hist`: every field is transported to
/// `x - v t` and then `E -= v x B`, `H += v x D`, `j += rho v`.
pub fn generate_boosted_solution(hist: &FieldHistory, v: Vec3) -> Result<FieldHistory> {
    hist.validate()?;
    if !v.is_finite() {
        return Err(Error::NonFinite("boost velocity"));
    }
    if v == Vec3::ZERO {
        return Ok(hist.clone());
    }
    let ops = DiffOps::new(&hist.grid, Scheme::Spectral);
    let offsets: Vec<Vec3> = (0..hist.len()).map(|k| v * hist.time(k)).collect();
    let e = shift_series(&ops, &hist.e, &offsets)?;
    let b = shift_series(&ops, &hist.b, &offsets)?;
    let d = hist.d.as_deref().map(|s| shift_series(&ops, s, &offsets)).transpose()?;
    let h = hist.h.as_deref().map(|s| shift_series(&ops, s, &offsets)).transpose()?;
    let rho = hist.rho.as_deref().map(|s| shift_series(&ops, s, &offsets)).transpose()?;
    let j = hist.j.as_deref().map(|s| shift_series(&ops, s, &offsets)).transpose()?;

    let e_new = add_cross(&e, v, &b, -1.0);
    let h_new = match (&h, &d) {
        (Some(h), Some(d)) => Some(add_cross(h, v, d, 1.0)),
        (Some(h), None) => Some(h.clone()),
        _ => None,
    };
    let j_new = match (&j, &rho) {
        (Some(j), Some(rho)) => Some(
            j.iter()
                .zip(rho)
                .map(|(jk, rk)| {
                    let mut out = jk.clone();
                    for c in 0..3 {
                        let vc = v[c];
                        for (o, r) in out.component_mut(c).iter_mut().zip(rk.data()) {
                            *o += vc * r;
                        }
                    }
                    out
                })
                .collect(),
        ),
        (Some(j), None) => Some(j.clone()),
        _ => None,
    };
    let mut meta = hist.meta.clone();
    meta.notes.push(format!("boosted by v = ({}, {}, {})", v.x, v.y, v.z));
    let tail = transport_error(&ops, hist);
    meta.interpolation_error = Some(meta.interpolation_error.unwrap_or(0.0).max(tail));
    let out = FieldHistory {
        grid: hist.grid,
        t0: hist.t0,
        dt: hist.dt,
        e: e_new,
        b,
        d,
        h: h_new,
        rho,
        j: j_new,
        meta,
    };
    out.validate()?;
    Ok(out)
}

/// Magnetic-limit counterpart of [`generate_boosted_solution`]: fields map as
/// in the Galilean case, sources by `rho += eps0 mu0 v.j`, `j` unchanged.
/// `D` and `H` are not part of the magnetic limit and are dropped.
pub fn magnetic_limit_boosted_history(
    hist: &FieldHistory,
    v: Vec3,
    k: &Constants,
) -> Result<FieldHistory> {
    let (rho, j) = hist.require_sources()?;
    let mut base = hist.clone();
    base.d = None;
    base.h = None;
    base.rho = None;
    base.j = None;
    let mut out = generate_boosted_solution(&base, v)?;
    if v == Vec3::ZERO {
        out.rho = Some(rho.to_vec());
        out.j = Some(j.to_vec());
        return Ok(out);
    }
    let ops = DiffOps::new(&hist.grid, Scheme::Spectral);
    let offsets: Vec<Vec3> = (0..hist.len()).map(|n| v * hist.time(n)).collect();
    let rho_s = shift_series(&ops, rho, &offsets)?;
    let j_s = shift_series(&ops, j, &offsets)?;
    let rho_new = rho_s
        .iter()
        .zip(&j_s)
        .map(|(r, jk)| {
            let mut out = r.clone();
            for i in 0..hist.grid.len() {
                let s = SourceDensity::new(r[i], jk.get(i));
                out[i] = magnetic_limit_boost_sources(&s, -v, k).rho;
            }
            out
        })
        .collect();
    out.rho = Some(rho_new);
    out.j = Some(j_s);
    Ok(out)
}

/// Lorentz boost of a static history along one grid axis (experimental).
///
/// The boosted fields are periodic with length `L/gamma` along the boost
/// axis, so the result lives on a contracted grid with the same point count.
/// Sample `x'_i` at time `t'` reads the original at `x_i + gamma v t'`, which
/// is realized by a spectral shift.
pub fn lorentz_boost_static_history(
    hist: &FieldHistory,
    v: Vec3,
    k: &Constants,
) -> Result<FieldHistory> {
    hist.validate()?;
    check_subluminal(v, k)?;
    let (d, h) = hist.require_dh()?;
    let (rho, j) = hist.require_sources()?;
    if !hist.is_static() {
        return Err(Error::Unsupported(
            "Lorentz history boosts need a static history".into(),
        ));
    }
    let axes: Vec<usize> = (0..3).filter(|&a| v[a] != 0.0).collect();
    if axes.len() > 1 {
        return Err(Error::Unsupported(
            "Lorentz history boosts must be along one grid axis".into(),
        ));
    }
    if axes.is_empty() {
        return Ok(hist.clone());
    }
    let axis = axes[0];
    let speed = v.norm();
    let gamma = 1.0 / (1.0 - speed * speed * k.inv_c2()).sqrt();
    let mut l = hist.grid.lengths();
    l[axis] /= gamma;
    let grid = Grid3::new(hist.grid.n(), l)?;
    let ops = DiffOps::new(&hist.grid, Scheme::Spectral);

    type Frame = (VectorField, VectorField, VectorField, VectorField, ScalarField, VectorField);
    let frames: Vec<Frame> = (0..hist.len())
        .into_par_iter()
        .map(|n| -> Result<Frame> {
            let off = -(v * (gamma * hist.time(n)));
            let e = ops.shift(&hist.e[0], off)?;
            let b = ops.shift(&hist.b[0], off)?;
            let dd = ops.shift(&d[0], off)?;
            let hh = ops.shift(&h[0], off)?;
            let r = ops.shift(&rho[0], off)?;
            let jj = ops.shift(&j[0], off)?;
            let mut out = (
                VectorField::zeros(&grid),
                VectorField::zeros(&grid),
                VectorField::zeros(&grid),
                VectorField::zeros(&grid),
                ScalarField::zeros(&grid),
                VectorField::zeros(&grid),
            );
            for i in 0..grid.len() {
                let f = PointEMField::new(e.get(i), b.get(i), dd.get(i), hh.get(i));
                let s = SourceDensity::new(r[i], jj.get(i));
                let (f2, s2) = lorentz_boost_event(&f, &s, v, k)?;
                out.0.set(i, f2.e);
                out.1.set(i, f2.b);
                out.2.set(i, f2.d);
                out.3.set(i, f2.h);
                out.4[i] = s2.rho;
                out.5.set(i, s2.j);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut out = FieldHistory {
        grid,
        t0: hist.t0,
        dt: hist.dt,
        e: Vec::new(),
        b: Vec::new(),
        d: Some(Vec::new()),
        h: Some(Vec::new()),
        rho: Some(Vec::new()),
        j: Some(Vec::new()),
        meta: hist.meta.clone(),
    };
    for (e, b, dd, hh, r, jj) in frames {
        out.e.push(e);
        out.b.push(b);
        out.d.as_mut().expect("set").push(dd);
        out.h.as_mut().expect("set").push(hh);
        out.rho.as_mut().expect("set").push(r);
        out.j.as_mut().expect("set").push(jj);
    }
    out.meta
        .notes
        .push(format!("lorentz boost v = ({}, {}, {}), gamma = {gamma}", v.x, v.y, v.z));
    out.meta.interpolation_error = Some(transport_error(&ops, hist));
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::{galilean_invariants, lorentz_invariants};
    use crate::quantum::{init_wavefunction, snap_to_lattice, InitialState, Particle};
    use crate::stats::loglog_slope;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rv(rng: &mut ChaCha8Rng) -> Vec3 {
        Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
    }

    fn random_field(rng: &mut ChaCha8Rng) -> (PointEMField, SourceDensity) {
        (
            PointEMField::new(rv(rng), rv(rng), rv(rng), rv(rng)),
            SourceDensity::new(rng.random_range(-1.0..1.0), rv(rng)),
        )
    }

    #[test]
    fn galilean_cross_product_example() {
        let f = PointEMField::new(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0), Vec3::ZERO, Vec3::ZERO);
        let (g, _) = galilean_boost_event(&f, &SourceDensity::default(), Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(g.e, Vec3::new(0.0, -1.0, 0.0));
        assert_eq!(g.b, Vec3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn zero_velocity_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (f, s) = random_field(&mut rng);
        assert_eq!(galilean_boost_event(&f, &s, Vec3::ZERO), (f, s));
        assert_eq!(lorentz_boost_event(&f, &s, Vec3::ZERO, &Constants::unit()).unwrap(), (f, s));
        assert_eq!(magnetic_limit_boost_sources(&s, Vec3::ZERO, &Constants::unit()), s);
        assert_eq!(boost_potentials(0.3, s.j, Vec3::ZERO), (0.3, s.j));
    }

    #[test]
    fn galilean_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let (f, s) = random_field(&mut rng);
            let (v1, v2) = (rv(&mut rng), rv(&mut rng));
            let (f1, s1) = galilean_boost_event(&f, &s, v1);
            let (f12, s12) = galilean_boost_event(&f1, &s1, v2);
            let (fs, ss) = galilean_boost_event(&f, &s, v1 + v2);
            for (a, b) in f12.components().iter().zip(fs.components()) {
                assert!((a - b).abs() < 1e-14);
            }
            for (a, b) in s12.components().iter().zip(ss.components()) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn galilean_invariants_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let (f, s) = random_field(&mut rng);
            let v = rv(&mut rng) * 3.0;
            let (g, _) = galilean_boost_event(&f, &s, v);
            let a = galilean_invariants(&f).unwrap().values;
            let b = galilean_invariants(&g).unwrap().values;
            for i in 0..6 {
                assert!((a[i] - b[i]).abs() < 1e-13 * 30.0, "I{} {} {}", i + 1, a[i], b[i]);
            }
        }
    }

    #[test]
    fn lorentz_pure_electric_example() {
        let k = Constants::with_c(2.0).unwrap();
        let v = 1.2;
        let gamma = 1.0 / (1.0 - v * v / 4.0f64).sqrt();
        let f = PointEMField::new(Vec3::new(0.0, 3.0, 0.0), Vec3::ZERO, Vec3::ZERO, Vec3::ZERO);
        let (g, _) = lorentz_boost_event(&f, &SourceDensity::default(), Vec3::new(v, 0.0, 0.0), &k)
            .unwrap();
        assert!((g.e - Vec3::new(0.0, gamma * 3.0, 0.0)).norm() < 1e-14);
        assert!((g.b - Vec3::new(0.0, 0.0, -gamma * v * 3.0 / 4.0)).norm() < 1e-14);
    }

    #[test]
    fn lorentz_invariants_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let k = Constants::with_c(3.0).unwrap();
        for _ in 0..200 {
            let (f, s) = random_field(&mut rng);
            let dir = rv(&mut rng);
            let v = dir * (0.9 * k.c() / dir.norm());
            let (g, _) = lorentz_boost_event(&f, &s, v, &k).unwrap();
            let a = lorentz_invariants(&f, &k).unwrap().values;
            let b = lorentz_invariants(&g, &k).unwrap().values;
            let sc = crate::em::invariants::lorentz_scales(&f, &k);
            for i in 0..6 {
                assert!((a[i] - b[i]).abs() <= 1e-10 * sc[i], "I{}", i + 1);
            }
        }
    }

    #[test]
    fn lorentz_rejects_superluminal() {
        let k = Constants::unit();
        let r = lorentz_boost_event(
            &PointEMField::default(),
            &SourceDensity::default(),
            Vec3::new(1.0, 0.0, 0.0),
            &k,
        );
        assert!(matches!(r, Err(Error::SuperluminalBoost { .. })));
    }

    #[test]
    fn magnetic_limit_arithmetic() {
        let s = SourceDensity::new(0.0, Vec3::new(1.0, 0.0, 0.0));
        let out = magnetic_limit_boost_sources(&s, Vec3::new(2.0, 0.0, 0.0), &Constants::unit());
        assert_eq!(out.rho, -2.0);
        assert_eq!(out.j, s.j);
        let (_, g) = galilean_boost_event(&PointEMField::default(), &s, Vec3::new(2.0, 0.0, 0.0));
        assert_eq!(g.rho, 0.0);
        assert_ne!(g.rho, out.rho);
    }

    #[test]
    fn potentials_arithmetic() {
        let (phi, a) = boost_potentials(1.0, Vec3::new(1.0, 1.0, 0.0), Vec3::new(2.0, 0.0, 0.0));
        assert_eq!(phi, -1.0);
        assert_eq!(a, Vec3::new(1.0, 1.0, 0.0));
    }

    #[test]
    fn limit_gap_scales_inverse_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (f, s) = random_field(&mut rng);
        let dir = rv(&mut rng);
        let v = dir / dir.norm();
        let cs = [10.0, 100.0, 1000.0, 1e4];
        let gaps = limit_gap(&f, &s, v, &cs).unwrap();
        let slope = loglog_slope(&cs, &gaps);
        assert!((slope + 2.0).abs() < 0.05, "slope {slope}");
        let ratio = gaps[0] / gaps[1];
        assert!((ratio / 100.0 - 1.0).abs() < 0.1, "ratio {ratio}");
        assert!(limit_gap(&f, &s, Vec3::ZERO, &cs).unwrap().iter().all(|&g| g == 0.0));
        assert!(limit_gap(&f, &s, v * 20.0, &cs).is_err());
    }

    #[test]
    fn boosted_potentials_match_field_boost() {
        let g = Grid3::new([32, 16, 4], [TAU, TAU, 1.0]).unwrap();
        let dt = 1e-3;
        let p = Potentials::sample(g, 0.2, dt, 5, |x, t| {
            (
                (x.x + 0.5 * t).cos(),
                Vec3::new(x.y.sin() * (1.0 + t), (x.x - t).cos(), 0.2 * x.y.cos()),
            )
        })
        .unwrap();
        let v = Vec3::new(0.4, -0.2, 0.0);
        let bp = boost_potential_history(&p, v).unwrap();
        let h = FieldHistory::from_potentials(&p, Scheme::Spectral).unwrap();
        let hb = FieldHistory::from_potentials(&bp, Scheme::Spectral).unwrap();
        // expected: galilean event boost evaluated at x' + v t
        let ops = DiffOps::new(&g, Scheme::Spectral);
        for n in 1..4 {
            let off = -(v * h.time(n));
            let e = ops.shift(&h.e[n], off).unwrap();
            let b = ops.shift(&h.b[n], off).unwrap();
            for i in 0..g.len() {
                let f = PointEMField::new(e.get(i), b.get(i), Vec3::ZERO, Vec3::ZERO);
                let (want, _) = galilean_boost_event(&f, &SourceDensity::default(), v);
                assert!((hb.e[n].get(i) - want.e).norm() < 1e-6);
                assert!((hb.b[n].get(i) - want.b).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn wavefunction_boost_of_plane_wave() {
        let g = Grid3::new([16, 4, 4], [TAU, 1.0, 1.0]).unwrap();
        let p = Particle::natural(1.0);
        let k = Vec3::new(2.0, 0.0, 0.0);
        let wf = init_wavefunction(&InitialState::PlaneWave { k }, &g, p).unwrap();
        let v = Vec3::new(1.0, 0.0, 0.0);
        let t = 0.37;
        let out = boost_wavefunction(&wf, v, t).unwrap();
        let want =
            init_wavefunction(&InitialState::PlaneWave { k: k + v }, &g, p).unwrap();
        let phase = Complex64::from_polar(1.0, -(k.dot(v) * t + 0.5 * v.norm_sq() * t));
        for (a, b) in out.psi.iter().zip(&want.psi) {
            assert!((a - b * phase).norm() < 1e-12);
        }
        assert_eq!(boost_wavefunction(&wf, Vec3::ZERO, t).unwrap(), wf);
        assert!(matches!(
            boost_wavefunction(&wf, Vec3::new(0.5, 0.0, 0.0), t),
            Err(Error::NonPeriodicPhase { axis: 0, .. })
        ));
        let _ = snap_to_lattice(&g, k);
    }

    fn smooth_history() -> FieldHistory {
        let g = Grid3::new([32, 8, 4], [TAU, TAU, 1.0]).unwrap();
        let mut h = FieldHistory::sample_eb(g, 0.1, 0.01, 4, |x, t| {
            (
                Vec3::new(x.y.cos(), (x.x + t).sin(), 0.3),
                Vec3::new(0.1, x.y.sin(), (x.x - t).cos()),
            )
        })
        .unwrap();
        h.d = Some(h.e.clone());
        h.h = Some(h.b.iter().map(|b| b.scaled(2.0)).collect());
        h.rho = Some(h.e.iter().map(|e| e.component_field(1)).collect());
        h.j = Some(h.b.clone());
        h
    }

    #[test]
    fn boosted_solution_identity_and_round_trip() {
        let h = smooth_history();
        assert_eq!(generate_boosted_solution(&h, Vec3::ZERO).unwrap(), h);
        let v = Vec3::new(0.3, -0.7, 0.0);
        let there = generate_boosted_solution(&h, v).unwrap();
        let back = generate_boosted_solution(&there, -v).unwrap();
        for n in 0..h.len() {
            for (a, b) in [(&back.e[n], &h.e[n]), (&back.b[n], &h.b[n])] {
                let mut d = a.clone();
                d.axpy(-1.0, b);
                assert!(d.max_abs() < 1e-12, "{}", d.max_abs());
            }
            let mut dj = back.j.as_ref().unwrap()[n].clone();
            dj.axpy(-1.0, &h.j.as_ref().unwrap()[n]);
            assert!(dj.max_abs() < 1e-12);
        }
        assert!(there.meta.interpolation_error.unwrap() < 1e-12);
    }

    #[test]
    fn boosted_solution_is_deterministic_across_pools() {
        let h = smooth_history();
        let v = Vec3::new(0.3, 0.1, 0.0);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| generate_boosted_solution(&h, v).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn lorentz_history_requires_static_axis_boost() {
        let mut h = smooth_history();
        let k = Constants::with_c(10.0).unwrap();
        assert!(matches!(
            lorentz_boost_static_history(&h, Vec3::new(1.0, 0.0, 0.0), &k),
            Err(Error::Unsupported(_))
        ));
        for s in [&mut h.e, &mut h.b] {
            let f = s[0].clone();
            s.iter_mut().for_each(|x| *x = f.clone());
        }
        for s in [h.d.as_mut().unwrap(), h.h.as_mut().unwrap(), h.j.as_mut().unwrap()] {
            let f = s[0].clone();
            s.iter_mut().for_each(|x| *x = f.clone());
        }
        let r0 = h.rho.as_ref().unwrap()[0].clone();
        h.rho.as_mut().unwrap().iter_mut().for_each(|x| *x = r0.clone());
        assert!(matches!(
            lorentz_boost_static_history(&h, Vec3::new(1.0, 1.0, 0.0), &k),
            Err(Error::Unsupported(_))
        ));
        let out = lorentz_boost_static_history(&h, Vec3::new(6.0, 0.0, 0.0), &k).unwrap();
        assert!((out.grid.lengths()[0] - TAU * 0.8).abs() < 1e-12);
    }
}
