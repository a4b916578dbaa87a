//! Discrete residuals of the field equations, manufactured sources and
//! covariance verdicts.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrete::fs1::fmt_f64;
use crate::discrete::{ddt, DiffOps, FieldHistory, Grid3, GridField, ScalarField, Scheme, VectorField};
use crate::em::{Constants, ConstitutiveLaw, Vec3};
use crate::error::{Error, Result};
use crate::transforms::{generate_boosted_solution, lorentz_boost_static_history, BoostKind, BoostParams};

/// RMS over points and interior time samples, and pointwise maximum of the
/// residual magnitude.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l2: f64,
    pub linf: f64,
}

impl Norms {
    pub fn max(&self) -> f64 {
        self.l2.max(self.linf)
    }
}

/// Per-sample partial sums: `(sum of |r|^2, max |r|, point count)`.
#[derive(Clone, Copy, Default)]
struct Partial {
    sum_sq: f64,
    max: f64,
    count: usize,
}

impl Partial {
    fn of_components(comps: &[&[f64]]) -> Self {
        let n = comps[0].len();
        let mut p = Self {
            count: n,
            ..Default::default()
        };
        for i in 0..n {
            let sq: f64 = comps.iter().map(|c| c[i] * c[i]).sum();
            p.sum_sq += sq;
            p.max = p.max.max(sq.sqrt());
        }
        p
    }

    fn scalar(f: &ScalarField) -> Self {
        Self::of_components(&[f.as_slice()])
    }

    fn vector(f: &VectorField) -> Self {
        Self::of_components(&[f.component(0), f.component(1), f.component(2)])
    }
}

fn reduce(parts: impl IntoIterator<Item = Partial>) -> Norms {
    let (mut s, mut m, mut n) = (0.0, 0.0f64, 0usize);
    for p in parts {
        s += p.sum_sq;
        m = m.max(p.max);
        n += p.count;
    }
    Norms {
        l2: if n == 0 { 0.0 } else { (s / n as f64).sqrt() },
        linf: m,
    }
}

fn interior(nt: usize) -> std::ops::Range<usize> {
    1..nt - 1
}

fn require_samples(hist: &FieldHistory) -> Result<()> {
    if hist.len() < 3 {
        return Err(Error::TooFewTimeSamples {
            needed: 3,
            got: hist.len(),
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub faraday: Norms,
    pub div_b: Norms,
    pub ampere: Norms,
    pub gauss: Norms,
    pub continuity: Norms,
    pub constitutive: Norms,
    pub grid: Grid3,
    pub scheme: Scheme,
    pub law: String,
}

impl ResidualReport {
    pub fn entries(&self) -> [(&'static str, Norms); 6] {
        [
            ("faraday", self.faraday),
            ("div_b", self.div_b),
            ("ampere", self.ampere),
            ("gauss", self.gauss),
            ("continuity", self.continuity),
            ("constitutive", self.constitutive),
        ]
    }

    /// Largest L2 or Linf norm in the report.
    pub fn worst(&self) -> f64 {
        self.entries().iter().fold(0.0, |m, (_, n)| m.max(n.max()))
    }

    /// `key: value` lines, one norm per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let n = self.grid.n();
        let l = self.grid.lengths();
        let _ = writeln!(s, "law: {}", self.law);
        let _ = writeln!(s, "scheme: {}", self.scheme);
        let _ = writeln!(
            s,
            "grid: {} {} {} {} {} {}",
            n[0],
            n[1],
            n[2],
            fmt_f64(l[0]),
            fmt_f64(l[1]),
            fmt_f64(l[2])
        );
        for (name, v) in self.entries() {
            let _ = writeln!(s, "{name}.l2: {}", fmt_f64(v.l2));
            let _ = writeln!(s, "{name}.linf: {}", fmt_f64(v.linf));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check_law_grid(hist: &FieldHistory) -> Result<()> {
    hist.validate()?;
    require_samples(hist)
}

/// Residuals of the full field equations, the constitutive law and charge
/// continuity on the interior time samples of `hist`.
pub fn maxwell_residuals(
    hist: &FieldHistory,
    law: &ConstitutiveLaw,
    k: &Constants,
    scheme: Scheme,
) -> Result<ResidualReport> {
    check_law_grid(hist)?;
    let (d, h) = hist.require_dh()?;
    let (rho, j) = hist.require_sources()?;
    let ops = DiffOps::new(&hist.grid, scheme);
    let db = ddt(&hist.b, hist.dt)?;
    let dd = ddt(d, hist.dt)?;
    let drho = ddt(rho, hist.dt)?;
    let n = hist.grid.len();

    let parts: Vec<[Partial; 6]> = interior(hist.len())
        .into_par_iter()
        .map(|t| -> Result<[Partial; 6]> {
            let mut far = ops.curl(&hist.e[t])?;
            far.axpy(1.0, &db[t]);
            let divb = ops.div(&hist.b[t])?;
            let mut amp = ops.curl(&h[t])?;
            amp.axpy(-1.0, &dd[t]);
            amp.axpy(-1.0, &j[t]);
            let mut gauss = ops.div(&d[t])?;
            gauss.axpy(-1.0, &rho[t]);
            let mut cont = ops.div(&j[t])?;
            cont.axpy(1.0, &drho[t]);
            let mut con = vec![vec![0.0; n]; 6];
            for i in 0..n {
                let (a, b, first, second) = if law.family().is_mn() {
                    let (dd, hh) = law.eval_mn(hist.e[t].get(i), hist.b[t].get(i), k)?;
                    (d[t].get(i), h[t].get(i), dd, hh)
                } else {
                    let (bb, ee) = law.eval_qr(d[t].get(i), h[t].get(i), k)?;
                    (hist.b[t].get(i), hist.e[t].get(i), bb, ee)
                };
                let r1 = a - first;
                let r2 = b - second;
                for c in 0..3 {
                    con[c][i] = r1[c];
                    con[3 + c][i] = r2[c];
                }
            }
            let con_refs: Vec<&[f64]> = con.iter().map(|v| v.as_slice()).collect();
            Ok([
                Partial::vector(&far),
                Partial::scalar(&divb),
                Partial::vector(&amp),
                Partial::scalar(&gauss),
                Partial::scalar(&cont),
                Partial::of_components(&con_refs),
            ])
        })
        .collect::<Result<_>>()?;
    let col = |c: usize| reduce(parts.iter().map(|p| p[c]));
    Ok(ResidualReport {
        faraday: col(0),
        div_b: col(1),
        ampere: col(2),
        gauss: col(3),
        continuity: col(4),
        constitutive: col(5),
        grid: hist.grid,
        scheme,
        law: law.name().to_string(),
    })
}

/// Norms of `d rho/dt + div j`.
pub fn continuity_residual(hist: &FieldHistory, scheme: Scheme) -> Result<Norms> {
    check_law_grid(hist)?;
    let (rho, j) = hist.require_sources()?;
    let ops = DiffOps::new(&hist.grid, scheme);
    let drho = ddt(rho, hist.dt)?;
    let parts: Vec<Partial> = interior(hist.len())
        .into_par_iter()
        .map(|t| -> Result<Partial> {
            let mut c = ops.div(&j[t])?;
            c.axpy(1.0, &drho[t]);
            Ok(Partial::scalar(&c))
        })
        .collect::<Result<_>>()?;
    Ok(reduce(parts))
}

/// Residuals of the magnetic limit: `curl E + dB/dt`, `div B`,
/// `curl B - mu0 j`, `div E - rho/eps0`, and continuity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagneticLimitReport {
    pub faraday: Norms,
    pub div_b: Norms,
    pub ampere: Norms,
    pub gauss: Norms,
    pub continuity: Norms,
}

impl MagneticLimitReport {
    pub fn entries(&self) -> [(&'static str, Norms); 5] {
        [
            ("faraday", self.faraday),
            ("div_b", self.div_b),
            ("ampere", self.ampere),
            ("gauss", self.gauss),
            ("continuity", self.continuity),
        ]
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (name, v) in self.entries() {
            let _ = writeln!(s, "{name}.l2: {}", fmt_f64(v.l2));
            let _ = writeln!(s, "{name}.linf: {}", fmt_f64(v.linf));
        }
        s
    }
}

pub fn magnetic_limit_residuals(
    hist: &FieldHistory,
    k: &Constants,
    scheme: Scheme,
) -> Result<MagneticLimitReport> {
    check_law_grid(hist)?;
    let (rho, j) = hist.require_sources()?;
    let ops = DiffOps::new(&hist.grid, scheme);
    let db = ddt(&hist.b, hist.dt)?;
    let drho = ddt(rho, hist.dt)?;
    let parts: Vec<[Partial; 5]> = interior(hist.len())
        .into_par_iter()
        .map(|t| -> Result<[Partial; 5]> {
            let mut far = ops.curl(&hist.e[t])?;
            far.axpy(1.0, &db[t]);
            let divb = ops.div(&hist.b[t])?;
            let mut amp = ops.curl(&hist.b[t])?;
            amp.axpy(-k.mu0(), &j[t]);
            let mut gauss = ops.div(&hist.e[t])?;
            gauss.axpy(-1.0 / k.eps0(), &rho[t]);
            let mut cont = ops.div(&j[t])?;
            cont.axpy(1.0, &drho[t]);
            Ok([
                Partial::vector(&far),
                Partial::scalar(&divb),
                Partial::vector(&amp),
                Partial::scalar(&gauss),
                Partial::scalar(&cont),
            ])
        })
        .collect::<Result<_>>()?;
    let col = |c: usize| reduce(parts.iter().map(|p| p[c]));
    Ok(MagneticLimitReport {
        faraday: col(0),
        div_b: col(1),
        ampere: col(2),
        gauss: col(3),
        continuity: col(4),
    })
}

/// Evaluates `D, H` from the law and defines `j = curl H - dD/dt`,
/// `rho = div D` so that Ampère and Gauss hold by construction.
pub fn synthesize_sources(
    hist: &FieldHistory,
    law: &ConstitutiveLaw,
    k: &Constants,
    scheme: Scheme,
) -> Result<FieldHistory> {
    if !law.family().is_mn() {
        return Err(Error::WrongFamily {
            expected: "an (E, B) -> (D, H) law",
            got: law.family().to_string(),
        });
    }
    check_law_grid(hist)?;
    let grid = hist.grid;
    let n = grid.len();
    let dh: Vec<(VectorField, VectorField)> = (0..hist.len())
        .into_par_iter()
        .map(|t| -> Result<_> {
            let mut d = VectorField::zeros(&grid);
            let mut h = VectorField::zeros(&grid);
            for i in 0..n {
                let (di, hi) = law.eval_mn(hist.e[t].get(i), hist.b[t].get(i), k)?;
                d.set(i, di);
                h.set(i, hi);
            }
            Ok((d, h))
        })
        .collect::<Result<_>>()?;
    let (d, h): (Vec<_>, Vec<_>) = dh.into_iter().unzip();
    let dd = ddt(&d, hist.dt)?;
    let ops = DiffOps::new(&grid, scheme);
    let src: Vec<(ScalarField, VectorField)> = (0..hist.len())
        .into_par_iter()
        .map(|t| -> Result<_> {
            let mut j = ops.curl(&h[t])?;
            j.axpy(-1.0, &dd[t]);
            Ok((ops.div(&d[t])?, j))
        })
        .collect::<Result<_>>()?;
    let (rho, j): (Vec<_>, Vec<_>) = src.into_iter().unzip();
    let mut out = hist.clone();
    out.d = Some(d);
    out.h = Some(h);
    out.rho = Some(rho);
    out.j = Some(j);
    out.meta.law = Some(law.name().to_string());
    Ok(out)
}

/// Verdict thresholds: a boosted norm passes if it is at most
/// `max(factor * original, floor)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerdictConfig {
    pub factor: f64,
    pub floor: f64,
}

impl Default for VerdictConfig {
    fn default() -> Self {
        Self {
            factor: 10.0,
            floor: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub original: ResidualReport,
    pub boosted: ResidualReport,
    pub covariant: bool,
    /// Entries (`name.l2` / `name.linf`) that exceeded their threshold.
    pub failures: Vec<String>,
    pub thresholds: VerdictConfig,
    pub boost_kind: BoostKind,
    pub v: Vec3,
    pub experimental: bool,
    pub interpolation_error: Option<f64>,
}

impl CovarianceReport {
    pub fn verdict_text(&self) -> String {
        let mut s = format!("covariant: {}\n", self.covariant);
        for f in &self.failures {
            let _ = writeln!(s, "failed: {f}");
        }
        s
    }
}

/// Compares residuals of `hist` with those of its boosted image under the
/// same law.
pub fn covariance_report(
    hist: &FieldHistory,
    law: &ConstitutiveLaw,
    boost: &BoostParams,
    k: &Constants,
    scheme: Scheme,
    cfg: VerdictConfig,
) -> Result<CovarianceReport> {
    boost.validate()?;
    let original = maxwell_residuals(hist, law, k, scheme)?;
    let (boosted_hist, experimental) = match boost.kind {
        BoostKind::Galilean => (generate_boosted_solution(hist, boost.v)?, false),
        BoostKind::Lorentz => (
            lorentz_boost_static_history(hist, boost.v, boost.k.as_ref().unwrap_or(k))?,
            true,
        ),
    };
    let boosted = maxwell_residuals(&boosted_hist, law, k, scheme)?;
    let mut failures = Vec::new();
    for ((name, o), (_, b)) in original.entries().iter().zip(boosted.entries()) {
        for (suffix, ov, bv) in [("l2", o.l2, b.l2), ("linf", o.linf, b.linf)] {
            let limit = (cfg.factor * ov).max(cfg.floor);
            if !(bv <= limit) {
                failures.push(format!("{name}.{suffix}"));
            }
        }
    }
    Ok(CovarianceReport {
        original,
        boosted,
        covariant: failures.is_empty(),
        failures,
        thresholds: cfg,
        boost_kind: boost.kind,
        v: boost.v,
        experimental,
        interpolation_error: boosted_hist.meta.interpolation_error,
    })
}
