use serde::{Deserialize, Serialize};

use crate::discrete::fs1::fmt_f64;
use crate::discrete::{DiffOps, Grid3, GridField, Scheme, VectorField};
use crate::em::{Constants, ConstitutiveLaw, Vec3};
use crate::error::{Error, Result};
use crate::residuals::Norms;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonConfig {
    /// Target for the RMS residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial step length of the line search.
    pub damping: f64,
    /// Smallest step length tried before giving up.
    pub min_damping: f64,
    pub krylov_max_iter: usize,
    /// Relative tolerance on the normal-equation residual.
    pub krylov_tol: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            damping: 1.0,
            min_damping: 1e-6,
            krylov_max_iter: 400,
            krylov_tol: 1e-12,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::BadParams(format!("newton tol {} must be positive", self.tol)));
        }
        if self.max_iter == 0 || self.krylov_max_iter == 0 {
            return Err(Error::BadParams("iteration caps must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::BadParams(format!("damping {} outside (0, 1]", self.damping)));
        }
        if !(self.min_damping > 0.0 && self.min_damping <= self.damping) {
            return Err(Error::BadParams(format!(
                "min_damping {} outside (0, damping]",
                self.min_damping
            )));
        }
        if !(self.krylov_tol > 0.0) {
            return Err(Error::BadParams("krylov_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonStep {
    pub iter: usize,
    pub residual: f64,
    pub damping: f64,
}

pub fn trace_csv(trace: &[NewtonStep]) -> String {
    let mut s = String::from("iter,residual,damping\n");
    for t in trace {
        s.push_str(&format!("{},{},{}\n", t.iter, fmt_f64(t.residual), fmt_f64(t.damping)));
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct StaticSolution {
    pub e: VectorField,
    pub residual: f64,
    pub iterations: usize,
    pub trace: Vec<NewtonStep>,
    /// Norms of `curl E`; a static field also needs this to vanish.
    pub curl_e: Norms,
}

/// Least-squares problem `curl H(E, B) = j` for the unknown `E`, with the
/// mean of `H` pinned to `mean_h` (the curl cannot see it).
struct StaticProblem<'a> {
    ops: DiffOps,
    law: &'a ConstitutiveLaw,
    b: &'a VectorField,
    j: &'a VectorField,
    k: &'a Constants,
    mean_h: Vec3,
    n: usize,
}

type Blocks = Vec<[[f64; 3]; 3]>;

impl StaticProblem<'_> {
    fn h_of(&self, e: &VectorField) -> Result<VectorField> {
        let mut h = VectorField::zeros(self.ops.grid());
        for i in 0..self.n {
            h.set(i, self.law.eval_mn(e.get(i), self.b.get(i), self.k)?.1);
        }
        Ok(h)
    }

    /// Residual as a flat vector `[curl H - j ; sqrt(N) (mean H - mean_h)]`.
    fn residual(&self, e: &VectorField) -> Result<Vec<f64>> {
        let h = self.h_of(e)?;
        let mut r = self.ops.curl(&h)?;
        r.axpy(-1.0, self.j);
        let mut out = r.data().to_vec();
        let m = (h.mean() - self.mean_h) * (self.n as f64).sqrt();
        out.extend_from_slice(&m.to_array());
        Ok(out)
    }

    fn rms(&self, r: &[f64]) -> f64 {
        (r.iter().map(|v| v * v).sum::<f64>() / self.n as f64).sqrt()
    }

    fn blocks(&self, e: &VectorField) -> Result<Blocks> {
        (0..self.n)
            .map(|i| {
                let jac = self.law.jacobian(e.get(i), self.b.get(i), self.k)?;
                Ok([0, 1, 2].map(|a| [jac[3 + a][0], jac[3 + a][1], jac[3 + a][2]]))
            })
            .collect()
    }

    fn apply(&self, p: &Blocks, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let mut u = VectorField::zeros(self.ops.grid());
        for i in 0..n {
            let vi = [v[i], v[n + i], v[2 * n + i]];
            let m = &p[i];
            u.set(
                i,
                Vec3::from_array([0, 1, 2].map(|a| m[a][0] * vi[0] + m[a][1] * vi[1] + m[a][2] * vi[2])),
            );
        }
        let mut out = self.ops.curl(&u)?.data().to_vec();
        let m = u.mean() * (n as f64).sqrt();
        out.extend_from_slice(&m.to_array());
        Ok(out)
    }

    fn apply_t(&self, p: &Blocks, w: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let wf = VectorField::from_data(w[..3 * n].to_vec());
        let z = self.ops.curl(&wf)?;
        let s = 1.0 / (n as f64).sqrt();
        let wm = [w[3 * n] * s, w[3 * n + 1] * s, w[3 * n + 2] * s];
        let mut out = vec![0.0; 3 * n];
        for i in 0..n {
            let zi = z.get(i);
            let zi = [zi.x + wm[0], zi.y + wm[1], zi.z + wm[2]];
            let m = &p[i];
            for b in 0..3 {
                out[b * n + i] = m[0][b] * zi[0] + m[1][b] * zi[1] + m[2][b] * zi[2];
            }
        }
        Ok(out)
    }

    /// CGLS for `min |J x + r|`.
    fn gauss_newton_direction(&self, p: &Blocks, r: &[f64], cfg: &NewtonConfig) -> Result<Vec<f64>> {
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut x = vec![0.0; 3 * self.n];
        let mut s: Vec<f64> = r.iter().map(|v| -v).collect();
        let mut g = self.apply_t(p, &s)?;
        let mut d = g.clone();
        let mut gamma = dot(&g, &g);
        let gamma0 = gamma;
        if gamma0 == 0.0 {
            return Ok(x);
        }
        for _ in 0..cfg.krylov_max_iter {
            let q = self.apply(p, &d)?;
            let qq = dot(&q, &q);
            if qq == 0.0 {
                break;
            }
            let alpha = gamma / qq;
            for (xi, di) in x.iter_mut().zip(&d) {
                *xi += alpha * di;
            }
            for (si, qi) in s.iter_mut().zip(&q) {
                *si -= alpha * qi;
            }
            g = self.apply_t(p, &s)?;
            let gn = dot(&g, &g);
            if gn.sqrt() <= cfg.krylov_tol * gamma0.sqrt() {
                break;
            }
            let beta = gn / gamma;
            gamma = gn;
            for (di, gi) in d.iter_mut().zip(&g) {
                *di = gi + beta * *di;
            }
        }
        Ok(x)
    }
}

fn solenoidal_check(ops: &DiffOps, f: &VectorField, what: &str) -> Result<f64> {
    f.ensure_finite("static solve input")?;
    let div = ops.div(f)?.max_abs();
    if div > 1e-10 * f.max_abs().max(1.0) {
        return Err(if what == "j" {
            Error::NonSolenoidalCurrent(div)
        } else {
            Error::BadParams(format!("B has divergence {div:e}"))
        });
    }
    Ok(div)
}

/// Damped Gauss–Newton solve of `curl H(E, B) = j` for a static `E` under an
/// `(E, B) -> (D, H)` law.
///
/// `mean_h` fixes the uniform part of `H`, which the curl cannot determine;
/// by default it is taken from the initial guess.
#[allow(clippy::too_many_arguments)]
pub fn solve_static(
    law: &ConstitutiveLaw,
    b: &VectorField,
    j: &VectorField,
    grid: &Grid3,
    k: &Constants,
    scheme: Scheme,
    cfg: &NewtonConfig,
    guess: Option<&VectorField>,
    mean_h: Option<Vec3>,
) -> Result<StaticSolution> {
    cfg.validate()?;
    if !law.family().is_mn() {
        return Err(Error::WrongFamily {
            expected: "an (E, B) -> (D, H) law",
            got: law.family().to_string(),
        });
    }
    b.check(grid)?;
    j.check(grid)?;
    let ops = DiffOps::new(grid, scheme);
    solenoidal_check(&ops, b, "B")?;
    solenoidal_check(&ops, j, "j")?;
    let mut e = match guess {
        Some(g) => {
            g.check(grid)?;
            g.clone()
        }
        None => VectorField::uniform(grid, Vec3::new(0.0, 0.0, 1.0)),
    };
    let mut problem = StaticProblem {
        ops,
        law,
        b,
        j,
        k,
        mean_h: Vec3::ZERO,
        n: grid.len(),
    };
    problem.mean_h = match mean_h {
        Some(m) => m,
        None => problem.h_of(&e)?.mean(),
    };

    let mut r = problem.residual(&e)?;
    let mut res = problem.rms(&r);
    let mut trace = vec![NewtonStep {
        iter: 0,
        residual: res,
        damping: 0.0,
    }];
    let mut iter = 0;
    while res > cfg.tol {
        if iter == cfg.max_iter {
            return Err(Error::NoConvergence {
                iterations: iter,
                residual: res,
                history: trace.iter().map(|t| t.residual).collect(),
                best: Some(Box::new(e)),
            });
        }
        iter += 1;
        let blocks = problem.blocks(&e)?;
        let dir = problem.gauss_newton_direction(&blocks, &r, cfg)?;
        let dir = VectorField::from_data(dir);
        let mut alpha = cfg.damping;
        loop {
            let mut trial = e.clone();
            trial.axpy(alpha, &dir);
            let rt = problem.residual(&trial)?;
            let rest = problem.rms(&rt);
            if rest < res {
                e = trial;
                r = rt;
                res = rest;
                break;
            }
            alpha *= 0.5;
            if alpha < cfg.min_damping {
                return Err(Error::SingularLinearization(res));
            }
        }
        trace.push(NewtonStep {
            iter,
            residual: res,
            damping: alpha,
        });
    }
    let curl_e = problem.ops.curl(&e)?;
    let n = grid.len() as f64;
    let sum_sq: f64 = curl_e.data().iter().map(|v| v * v).sum();
    Ok(StaticSolution {
        curl_e: Norms {
            l2: (sum_sq / n).sqrt(),
            linf: curl_e.max_norm(),
        },
        e,
        residual: res,
        iterations: iter,
        trace,
    })
}

/// [`solve_static`] for the `M = 0`, `N = E.B` Galilean law.
pub fn solve_static_case_a(
    b: &VectorField,
    j: &VectorField,
    grid: &Grid3,
    cfg: &NewtonConfig,
    guess: Option<&VectorField>,
    mean_h: Option<Vec3>,
) -> Result<StaticSolution> {
    solve_static(
        &ConstitutiveLaw::case_a(),
        b,
        j,
        grid,
        &Constants::unit(),
        Scheme::Spectral,
        cfg,
        guess,
        mean_h,
    )
}
