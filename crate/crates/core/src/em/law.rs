//! Constitutive closures relating (D, H) to (E, B).
//!
//! Lorentz laws take scalar coefficients of `(I1, I2)` or `(I3, I4)`,
//! Galilean laws of `(Î1, Î2)` or `(Î3, Î4)`. Coefficients are expressions
//! over those two invariants plus the symbols `eps0`, `mu0` and (Lorentz
//! families only) `c`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::expr::Expr;
use super::field::ensure_vec_finite;
use super::{Constants, Vec3};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawFamily {
    LinearVacuum,
    LorentzMn,
    LorentzQr,
    GalileanMn,
    GalileanQr,
}

impl LawFamily {
    pub fn is_mn(self) -> bool {
        matches!(
            self,
            LawFamily::LinearVacuum | LawFamily::LorentzMn | LawFamily::GalileanMn
        )
    }

    pub fn is_galilean(self) -> bool {
        matches!(self, LawFamily::GalileanMn | LawFamily::GalileanQr)
    }

    fn symbols(self) -> [&'static str; 5] {
        if self.is_mn() {
            ["I1", "I2", "eps0", "mu0", "c"]
        } else {
            ["I3", "I4", "eps0", "mu0", "c"]
        }
    }

    fn name(self) -> &'static str {
        match self {
            LawFamily::LinearVacuum => "linear-vacuum",
            LawFamily::LorentzMn => "lorentz-mn",
            LawFamily::LorentzQr => "lorentz-qr",
            LawFamily::GalileanMn => "galilean-mn",
            LawFamily::GalileanQr => "galilean-qr",
        }
    }
}

impl fmt::Display for LawFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LawFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "linear-vacuum" => LawFamily::LinearVacuum,
            "lorentz-mn" => LawFamily::LorentzMn,
            "lorentz-qr" => LawFamily::LorentzQr,
            "galilean-mn" => LawFamily::GalileanMn,
            "galilean-qr" => LawFamily::GalileanQr,
            _ => return Err(Error::BadParams(format!("unknown law family {s:?}"))),
        })
    }
}

const C_SYMBOL: usize = 4;

/// A constitutive law: a family tag plus its two coefficient functions.
///
/// For MN families the coefficients are `(M, N)`, for QR families `(Q, R)`.
/// `LinearVacuum` has none.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstitutiveLaw {
    family: LawFamily,
    name: String,
    coefficients: Option<(Expr, Expr)>,
}

/// 6x6 derivative `d(D, H) / d(E, B)`; `m[row][col]` with rows `D0..2, H0..2`
/// and columns `E0..2, B0..2`.
pub type Jacobian6 = [[f64; 6]; 6];

impl ConstitutiveLaw {
    pub fn vacuum() -> Self {
        Self {
            family: LawFamily::LinearVacuum,
            name: "vacuum".into(),
            coefficients: None,
        }
    }

    /// `M̂ = 0`, `N̂ = Î2 = E·B`; forces `D = 0`, hence `rho = 0`.
    pub fn case_a() -> Self {
        Self::from_strings(LawFamily::GalileanMn, "0", "I2")
            .expect("preset")
            .named("case-a")
    }

    /// `M̂ = Î2 = E·B`, `N̂ = 1/mu0`.
    pub fn case_b() -> Self {
        Self::from_strings(LawFamily::GalileanMn, "I2", "1/mu0")
            .expect("preset")
            .named("case-b")
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "vacuum" => Ok(Self::vacuum()),
            "case-a" => Ok(Self::case_a()),
            "case-b" => Ok(Self::case_b()),
            _ => Err(Error::BadParams(format!(
                "unknown constitutive preset {name:?} (expected vacuum, case-a, case-b)"
            ))),
        }
    }

    /// Builds a law from two coefficient expressions: `(M, N)` for MN
    /// families, `(Q, R)` for QR families.
    pub fn from_strings(family: LawFamily, first: &str, second: &str) -> Result<Self> {
        if family == LawFamily::LinearVacuum {
            return Ok(Self::vacuum());
        }
        let syms = family.symbols();
        let a = Expr::parse(first, &syms)?;
        let b = Expr::parse(second, &syms)?;
        Self::from_exprs(family, a, b)
    }

    fn from_exprs(family: LawFamily, a: Expr, b: Expr) -> Result<Self> {
        if family.is_galilean() && (a.uses(C_SYMBOL) || b.uses(C_SYMBOL)) {
            return Err(Error::BadParams(
                "Galilean laws may not reference the speed of light".into(),
            ));
        }
        let name = format!("{family}[{}; {}]", a.source(), b.source());
        Ok(Self {
            family,
            name,
            coefficients: Some((a, b)),
        })
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn family(&self) -> LawFamily {
        self.family
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Coefficient expression sources, if any.
    pub fn coefficient_sources(&self) -> Option<(&str, &str)> {
        self.coefficients
            .as_ref()
            .map(|(a, b)| (a.source(), b.source()))
    }

    /// The same law with `M` (or `M̂`) replaced by `M + lambda`.
    pub fn with_m_shift(&self, lambda: f64) -> Result<Self> {
        let (family, m, n) = match (&self.family, &self.coefficients) {
            (LawFamily::LinearVacuum, _) => (
                LawFamily::LorentzMn,
                Expr::constant(0.0),
                Expr::parse("1/mu0", &LawFamily::LorentzMn.symbols())?,
            ),
            (f @ (LawFamily::LorentzMn | LawFamily::GalileanMn), Some((m, n))) => {
                (*f, m.clone(), n.clone())
            }
            _ => {
                return Err(Error::WrongFamily {
                    expected: "MN-form",
                    got: self.family.to_string(),
                })
            }
        };
        let shifted = Self::from_exprs(family, m.plus_constant(lambda), n)?;
        Ok(shifted.named(format!("{}+M{lambda:?}", self.name)))
    }

    fn coeffs(&self, a0: f64, a1: f64, k: &Constants) -> Result<(f64, f64)> {
        let (fa, fb) = self
            .coefficients
            .as_ref()
            .expect("non-vacuum laws carry coefficients");
        let vars = [a0, a1, k.eps0(), k.mu0(), k.c()];
        let (a, b) = (fa.eval(&vars), fb.eval(&vars));
        if a.is_finite() && b.is_finite() {
            Ok((a, b))
        } else {
            Err(Error::NonFinite("constitutive coefficient"))
        }
    }

    /// `(D, H)` from `(E, B)` for MN-form laws.
    pub fn eval_mn(&self, e: Vec3, b: Vec3, k: &Constants) -> Result<(Vec3, Vec3)> {
        ensure_vec_finite(e, "E")?;
        ensure_vec_finite(b, "B")?;
        let out = match self.family {
            LawFamily::LinearVacuum => (e * k.eps0(), b / k.mu0()),
            LawFamily::LorentzMn => {
                let i1 = b.norm_sq() - e.norm_sq() * k.inv_c2();
                let (m, n) = self.coeffs(i1, b.dot(e), k)?;
                (b * m + e * (n * k.inv_c2()), b * n - e * m)
            }
            LawFamily::GalileanMn => {
                let (m, n) = self.coeffs(b.norm_sq(), b.dot(e), k)?;
                (b * m, b * n - e * m)
            }
            _ => {
                return Err(Error::WrongFamily {
                    expected: "MN-form",
                    got: self.family.to_string(),
                })
            }
        };
        ensure_vec_finite(out.0, "D")?;
        ensure_vec_finite(out.1, "H")?;
        Ok(out)
    }

    /// `(B, E)` from `(D, H)` for QR-form laws.
    pub fn eval_qr(&self, d: Vec3, h: Vec3, k: &Constants) -> Result<(Vec3, Vec3)> {
        ensure_vec_finite(d, "D")?;
        ensure_vec_finite(h, "H")?;
        let out = match self.family {
            LawFamily::LorentzQr => {
                let i3 = d.norm_sq() - h.norm_sq() * k.inv_c2();
                let (q, r) = self.coeffs(i3, h.dot(d), k)?;
                (d * r + h * (q * k.inv_c2()), d * q - h * r)
            }
            LawFamily::GalileanQr => {
                let (q, r) = self.coeffs(d.norm_sq(), h.dot(d), k)?;
                (d * r, d * q - h * r)
            }
            _ => {
                return Err(Error::WrongFamily {
                    expected: "QR-form",
                    got: self.family.to_string(),
                })
            }
        };
        ensure_vec_finite(out.0, "B")?;
        ensure_vec_finite(out.1, "E")?;
        Ok(out)
    }

    /// `d(D, H)/d(E, B)` by central differences with step
    /// `max(1, |E|, |B|) * 1e-6`; the linear vacuum law returns its exact
    /// constant matrix.
    pub fn jacobian(&self, e: Vec3, b: Vec3, k: &Constants) -> Result<Jacobian6> {
        if !self.family.is_mn() {
            return Err(Error::WrongFamily {
                expected: "MN-form",
                got: self.family.to_string(),
            });
        }
        let mut jac = [[0.0; 6]; 6];
        if self.family == LawFamily::LinearVacuum {
            for i in 0..3 {
                jac[i][i] = k.eps0();
                jac[3 + i][3 + i] = 1.0 / k.mu0();
            }
            return Ok(jac);
        }
        let h = 1e-6 * e.norm().max(b.norm()).max(1.0);
        let base = [e.to_array(), b.to_array()].concat();
        for col in 0..6 {
            let mut plus = base.clone();
            let mut minus = base.clone();
            plus[col] += h;
            minus[col] -= h;
            let (dp, hp) = self.eval_mn(vec_at(&plus, 0), vec_at(&plus, 3), k)?;
            let (dm, hm) = self.eval_mn(vec_at(&minus, 0), vec_at(&minus, 3), k)?;
            let step = plus[col] - minus[col];
            let dd = (dp - dm) / step;
            let dh = (hp - hm) / step;
            for i in 0..3 {
                jac[i][col] = dd[i];
                jac[3 + i][col] = dh[i];
            }
        }
        Ok(jac)
    }
}

fn vec_at(a: &[f64], off: usize) -> Vec3 {
    Vec3::new(a[off], a[off + 1], a[off + 2])
}

impl fmt::Display for ConstitutiveLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Free-function form of [`ConstitutiveLaw::eval_mn`].
pub fn eval_constitutive_mn(
    law: &ConstitutiveLaw,
    e: Vec3,
    b: Vec3,
    k: &Constants,
) -> Result<(Vec3, Vec3)> {
    law.eval_mn(e, b, k)
}

/// Free-function form of [`ConstitutiveLaw::eval_qr`].
pub fn eval_constitutive_qr(
    law: &ConstitutiveLaw,
    d: Vec3,
    h: Vec3,
    k: &Constants,
) -> Result<(Vec3, Vec3)> {
    law.eval_qr(d, h, k)
}

pub fn constitutive_jacobian(
    law: &ConstitutiveLaw,
    e: Vec3,
    b: Vec3,
    k: &Constants,
) -> Result<Jacobian6> {
    law.jacobian(e, b, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    #[test]
    fn vacuum_identity_in_unit_constants() {
        let (d, h) = ConstitutiveLaw::vacuum()
            .eval_mn(v(1., 0., 0.), v(0., 1., 0.), &Constants::unit())
            .unwrap();
        assert_eq!(d, v(1., 0., 0.));
        assert_eq!(h, v(0., 1., 0.));
    }

    #[test]
    fn lorentz_mn_vacuum_choice_matches_linear_law() {
        let k = Constants::new(2.0, 0.5).unwrap();
        let law = ConstitutiveLaw::from_strings(LawFamily::LorentzMn, "0", "1/mu0").unwrap();
        let (e, b) = (v(0.3, -1.0, 2.0), v(1.5, 0.2, -0.7));
        let (d1, h1) = law.eval_mn(e, b, &k).unwrap();
        let (d2, h2) = ConstitutiveLaw::vacuum().eval_mn(e, b, &k).unwrap();
        assert!((d1 - d2).norm() < 1e-15 && (h1 - h2).norm() < 1e-15);
    }

    #[test]
    fn case_a_gives_zero_d() {
        let (e, b) = (v(0.4, -1.1, 0.9), v(2.0, 0.5, -0.3));
        let (d, h) = ConstitutiveLaw::case_a()
            .eval_mn(e, b, &Constants::unit())
            .unwrap();
        assert_eq!(d, Vec3::ZERO);
        assert!((h - b * e.dot(b)).norm() < 1e-15);
    }

    #[test]
    fn case_b_arithmetic() {
        let x = v(1., 0., 0.);
        let (d, h) = ConstitutiveLaw::case_b()
            .eval_mn(x, x, &Constants::unit())
            .unwrap();
        assert_eq!(d, x);
        assert_eq!(h, Vec3::ZERO);
    }

    #[test]
    fn galilean_mn_closure_is_h_consistent() {
        let law = ConstitutiveLaw::from_strings(LawFamily::GalileanMn, "I2 + 0.5*I1", "2 - I1").unwrap();
        let k = Constants::unit();
        let (e, b) = (v(0.7, 0.1, -0.2), v(-0.3, 1.2, 0.4));
        let (d, h) = law.eval_mn(e, b, &k).unwrap();
        let m = b.dot(e) + 0.5 * b.norm_sq();
        let n = 2.0 - b.norm_sq();
        assert!((d - b * m).norm() < 1e-15);
        assert!((h + e * m - b * n).norm() < 1e-15);
    }

    #[test]
    fn qr_forms() {
        let k = Constants::unit();
        let diag = ConstitutiveLaw::from_strings(LawFamily::GalileanQr, "1", "0").unwrap();
        let (b, e) = diag.eval_qr(v(2., 0., 0.), v(3., -1., 5.), &k).unwrap();
        assert_eq!(b, Vec3::ZERO);
        assert_eq!(e, v(2., 0., 0.));

        let law = ConstitutiveLaw::from_strings(LawFamily::GalileanQr, "I3", "1").unwrap();
        let (b, e) = law.eval_qr(v(1., 0., 0.), v(0., 1., 0.), &k).unwrap();
        assert_eq!(b, v(1., 0., 0.));
        assert_eq!(e, v(1., -1., 0.));
    }

    #[test]
    fn wrong_family_errors() {
        let k = Constants::unit();
        let qr = ConstitutiveLaw::from_strings(LawFamily::LorentzQr, "1", "1").unwrap();
        assert!(matches!(
            qr.eval_mn(Vec3::ZERO, Vec3::ZERO, &k),
            Err(Error::WrongFamily { .. })
        ));
        assert!(matches!(
            qr.jacobian(Vec3::ZERO, Vec3::ZERO, &k),
            Err(Error::WrongFamily { .. })
        ));
        assert!(matches!(
            ConstitutiveLaw::case_a().eval_qr(Vec3::ZERO, Vec3::ZERO, &k),
            Err(Error::WrongFamily { .. })
        ));
    }

    #[test]
    fn galilean_laws_reject_c() {
        assert!(ConstitutiveLaw::from_strings(LawFamily::GalileanMn, "c", "1").is_err());
        assert!(ConstitutiveLaw::from_strings(LawFamily::LorentzMn, "1/c", "1").is_ok());
        assert!(ConstitutiveLaw::from_strings(LawFamily::GalileanQr, "I1", "1").is_err());
    }

    #[test]
    fn non_finite_is_reported() {
        let law = ConstitutiveLaw::from_strings(LawFamily::GalileanMn, "1/I2", "1").unwrap();
        let r = law.eval_mn(v(1., 0., 0.), v(0., 1., 0.), &Constants::unit());
        assert!(matches!(r, Err(Error::NonFinite(_))));
        let r = ConstitutiveLaw::vacuum().eval_mn(v(f64::INFINITY, 0., 0.), Vec3::ZERO, &Constants::unit());
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn presets_by_name() {
        for name in ["vacuum", "case-a", "case-b"] {
            assert_eq!(ConstitutiveLaw::preset(name).unwrap().name(), name);
        }
        assert!(ConstitutiveLaw::preset("born-infeld").is_err());
    }

    #[test]
    fn m_shift_adds_constant() {
        let law = ConstitutiveLaw::case_b().with_m_shift(5.0).unwrap();
        let k = Constants::unit();
        let (e, b) = (v(1., 2., 0.), v(0.5, 0., 1.));
        let (d, h) = law.eval_mn(e, b, &k).unwrap();
        let m = e.dot(b) + 5.0;
        assert!((d - b * m).norm() < 1e-14);
        assert!((h - (b - e * m)).norm() < 1e-14);
    }

    #[test]
    fn vacuum_jacobian_is_block_diagonal() {
        let k = Constants::new(2.0, 4.0).unwrap();
        let j = ConstitutiveLaw::vacuum().jacobian(v(1., 2., 3.), v(4., 5., 6.), &k).unwrap();
        for (r, row) in j.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                let want = match (r, c) {
                    (r, c) if r == c && r < 3 => 2.0,
                    (r, c) if r == c => 0.25,
                    _ => 0.0,
                };
                assert_eq!(x, want, "entry ({r}, {c})");
            }
        }
    }

    #[test]
    fn case_a_jacobian_matches_hand_derivative() {
        // H = (E.B) B  =>  dH/dE = B B^T,  dH/dB = B E^T + (E.B) Id;  D = 0.
        let (e, b) = (v(0., 0., 1.), v(0., 0., 1.));
        let j = ConstitutiveLaw::case_a().jacobian(e, b, &Constants::unit()).unwrap();
        let (ea, ba) = (e.to_array(), b.to_array());
        for i in 0..3 {
            for c in 0..3 {
                let dhde = ba[i] * ba[c];
                let dhdb = ba[i] * ea[c] + if i == c { e.dot(b) } else { 0.0 };
                assert!((j[3 + i][c] - dhde).abs() <= 1e-6 * dhde.abs().max(1.0));
                assert!((j[3 + i][3 + c] - dhdb).abs() <= 1e-6 * dhdb.abs().max(1.0));
                assert_eq!(j[i][c], 0.0);
                assert_eq!(j[i][3 + c], 0.0);
            }
        }
    }
}
