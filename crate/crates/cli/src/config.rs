//! Scenario files: TOML with every table schema-checked and unknown keys
//! rejected.

use std::path::{Path, PathBuf};

use galem_core::discrete::fs1::Snapshot;
use galem_core::discrete::{GridField, ScalarField, VectorField};
use galem_core::em::expr::Expr;
use galem_core::quantum::{DGParams, InitialState, Particle};
use galem_core::residuals::{synthesize_sources, VerdictConfig};
use galem_core::solvers::{CouplingConfig, NewtonConfig};
use galem_core::transforms::BoostKind;
use galem_core::{
    Constants, ConstitutiveLaw, FieldHistory, Grid3, LawFamily, Potentials, Scheme, Vec3,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Time axis used when a static scenario omits `time`.
const STATIC_TIME: TimeSpec = TimeSpec {
    t0: 0.0,
    dt: 1.0,
    samples: 3,
};

const SPACE_TIME: [&str; 4] = ["x", "y", "z", "t"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Invariants,
    Boost,
    Residuals,
    Covariance,
    LimitStudy,
    SolveMagnetic,
    SolveCaseA,
    EvolveQuantum,
    EvolveCoupled,
    Manufacture,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Invariants => "invariants",
            Command::Boost => "boost",
            Command::Residuals => "residuals",
            Command::Covariance => "covariance",
            Command::LimitStudy => "limit-study",
            Command::SolveMagnetic => "solve-magnetic",
            Command::SolveCaseA => "solve-case-a",
            Command::EvolveQuantum => "evolve-quantum",
            Command::EvolveCoupled => "evolve-coupled",
            Command::Manufacture => "manufacture",
        }
    }
}

/// A number, or an expression string such as `"2*pi"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Value(f64),
    Expr(String),
}

impl Number {
    fn eval(&self, key: &str) -> CliResult<f64> {
        match self {
            Number::Value(v) => Ok(*v),
            Number::Expr(s) => {
                let e = Expr::parse(s, &[]).map_err(|e| CliError::config(key, e))?;
                Ok(e.eval(&[]))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<LawSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<SourceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<PointSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boost: Option<BoostSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<LimitSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton: Option<NewtonConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<StaticSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum: Option<QuantumSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: [usize; 3],
    pub l: [Number; 3],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

/// A preset name, or a family with two coefficient expressions.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second: Option<String>,
    /// Adds a constant to the first coefficient.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_shift: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default)]
    pub t0: f64,
    pub dt: f64,
    pub samples: usize,
}

/// Field history input: `E`/`B` expressions, potentials, or an FS1 file.
///
/// Expressions may use `x y z t` and the usual functions.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<[String; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<[String; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<[String; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<[String; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<[String; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<[String; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub e: [f64; 3],
    pub b: [f64; 3],
    #[serde(default)]
    pub d: [f64; 3],
    #[serde(default)]
    pub h: [f64; 3],
    #[serde(default)]
    pub rho: f64,
    #[serde(default)]
    pub j: [f64; 3],
    /// Number of seeded random boosts to check invariants against.
    #[serde(default)]
    pub random_boosts: usize,
    #[serde(default = "one")]
    pub max_speed: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoostModel {
    /// Solution generation: fields carried to `x - v t` and mixed.
    #[default]
    Solution,
    /// Magnetic-limit source transform.
    MagneticLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoostSpec {
    pub v: [f64; 3],
    #[serde(default)]
    pub kind: BoostKind,
    #[serde(default)]
    pub model: BoostModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSpec {
    pub c: Vec<f64>,
    pub v: [f64; 3],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guess: Option<[String; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_h: Option<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub phi: String,
    pub a: [String; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumSpec {
    #[serde(default = "default_particle")]
    pub particle: Particle,
    pub initial: InitialState,
    #[serde(default)]
    pub dg: DGParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default = "one_usize")]
    pub record_every: usize,
    /// External potentials, evaluated at each step time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potentials: Option<PotentialSpec>,
}

fn default_particle() -> Particle {
    Particle::natural(1.0)
}

fn one_usize() -> usize {
    1
}

/// `[f64; 3]` to `Vec3`.
pub fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::from_array(a)
}

struct VecExpr([Expr; 3]);

impl VecExpr {
    fn parse(src: &[String; 3], key: &str) -> CliResult<Self> {
        let mut out = Vec::with_capacity(3);
        for (c, s) in src.iter().enumerate() {
            out.push(
                Expr::parse(s, &SPACE_TIME).map_err(|e| CliError::config(&format!("{key}[{c}]"), e))?,
            );
        }
        Ok(Self(out.try_into().unwrap_or_else(|_| unreachable!())))
    }

    fn eval(&self, x: Vec3, t: f64) -> Vec3 {
        let v = [x.x, x.y, x.z, t];
        Vec3::new(self.0[0].eval(&v), self.0[1].eval(&v), self.0[2].eval(&v))
    }
}

fn scalar_expr(src: &str, key: &str) -> CliResult<Expr> {
    Expr::parse(src, &SPACE_TIME).map_err(|e| CliError::config(key, e))
}

fn eval_scalar(e: &Expr, x: Vec3, t: f64) -> f64 {
    e.eval(&[x.x, x.y, x.z, t])
}

fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing key `{key}`"))
}

/// A parsed scenario with the path it was read from.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub scenario: Scenario,
    pub base_dir: PathBuf,
}

pub fn load(path: &Path) -> CliResult<Loaded> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let scenario = parse(&text)?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { scenario, base_dir })
}

pub fn parse(text: &str) -> CliResult<Scenario> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))
}

impl Scenario {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn grid(&self) -> CliResult<Grid3> {
        let g = self.grid.as_ref().ok_or_else(|| missing("grid"))?;
        let mut l = [0.0; 3];
        for (a, n) in g.l.iter().enumerate() {
            l[a] = n.eval(&format!("grid.l[{a}]"))?;
        }
        Grid3::new(g.n, l).map_err(|e| CliError::config("grid", e))
    }

    pub fn constants(&self) -> CliResult<Constants> {
        let Some(c) = &self.constants else {
            return Ok(Constants::unit());
        };
        let r = match (c.eps0, c.mu0, c.c) {
            (None, None, None) => Ok(Constants::unit()),
            (None, None, Some(c)) => Constants::with_c(c),
            (Some(e), Some(m), None) => Constants::new(e, m),
            _ => {
                return Err(CliError::Config(
                    "constants: give either `c` or both `eps0` and `mu0`".into(),
                ))
            }
        };
        r.map_err(|e| CliError::config("constants", e))
    }

    /// The configured law, or `default` when the table is absent.
    pub fn law_or(&self, default: &str) -> CliResult<ConstitutiveLaw> {
        let spec = self.law.clone().unwrap_or(LawSpec {
            preset: Some(default.into()),
            ..Default::default()
        });
        let law = match (&spec.preset, &spec.family) {
            (Some(p), None) => {
                if spec.first.is_some() || spec.second.is_some() {
                    return Err(CliError::Config(
                        "law: `first`/`second` need `family`, not `preset`".into(),
                    ));
                }
                ConstitutiveLaw::preset(p).map_err(|e| CliError::config("law.preset", e))?
            }
            (None, Some(f)) => {
                let family: LawFamily = f.parse().map_err(|e| CliError::config("law.family", e))?;
                if family == LawFamily::LinearVacuum {
                    ConstitutiveLaw::vacuum()
                } else {
                    let first = spec.first.as_deref().ok_or_else(|| missing("law.first"))?;
                    let second = spec.second.as_deref().ok_or_else(|| missing("law.second"))?;
                    ConstitutiveLaw::from_strings(family, first, second)
                        .map_err(|e| CliError::config("law", e))?
                }
            }
            (None, None) => return Err(missing("law.preset")),
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "law: give either `preset` or `family`".into(),
                ))
            }
        };
        match spec.m_shift {
            Some(s) => law.with_m_shift(s).map_err(|e| CliError::config("law.m_shift", e)),
            None => Ok(law),
        }
    }

    pub fn law(&self) -> CliResult<ConstitutiveLaw> {
        if self.law.is_none() {
            return Err(missing("law"));
        }
        self.law_or("vacuum")
    }

    fn fields_spec(&self) -> CliResult<&FieldSpec> {
        self.fields.as_ref().ok_or_else(|| missing("fields"))
    }

    /// Field history with whatever the `fields` table provides.
    pub fn history(&self, base: &Path, scheme: Scheme) -> CliResult<FieldHistory> {
        let f = self.fields_spec()?;
        let grid = self.grid()?;
        let kinds = [f.e.is_some() || f.b.is_some(), f.phi.is_some() || f.a.is_some(), f.snapshot.is_some()];
        if kinds.iter().filter(|k| **k).count() != 1 {
            return Err(CliError::Config(
                "fields: give exactly one of `e`/`b`, `phi`/`a` or `snapshot`".into(),
            ));
        }
        if let Some(path) = &f.snapshot {
            return self.snapshot_history(&base.join(path), grid);
        }
        let t = self.time.clone().unwrap_or(STATIC_TIME);
        let mut h = if f.phi.is_some() || f.a.is_some() {
            let phi = scalar_expr(f.phi.as_deref().ok_or_else(|| missing("fields.phi"))?, "fields.phi")?;
            let a = VecExpr::parse(f.a.as_ref().ok_or_else(|| missing("fields.a"))?, "fields.a")?;
            let p = Potentials::sample(grid, t.t0, t.dt, t.samples, |x, t| (eval_scalar(&phi, x, t), a.eval(x, t)))
                .map_err(|e| CliError::config("time", e))?;
            FieldHistory::from_potentials(&p, scheme).map_err(|e| CliError::config("time", e))?
        } else {
            let e = VecExpr::parse(f.e.as_ref().ok_or_else(|| missing("fields.e"))?, "fields.e")?;
            let b = VecExpr::parse(f.b.as_ref().ok_or_else(|| missing("fields.b"))?, "fields.b")?;
            FieldHistory::sample_eb(grid, t.t0, t.dt, t.samples, |x, t| (e.eval(x, t), b.eval(x, t)))
                .map_err(|e| CliError::config("time", e))?
        };
        if f.d.is_some() != f.h.is_some() {
            return Err(CliError::Config("fields: `d` and `h` go together".into()));
        }
        if let (Some(d), Some(hh)) = (&f.d, &f.h) {
            let d = VecExpr::parse(d, "fields.d")?;
            let hx = VecExpr::parse(hh, "fields.h")?;
            h.d = Some(sample_vec(&h, &d));
            h.h = Some(sample_vec(&h, &hx));
        }
        Ok(h)
    }

    fn snapshot_history(&self, path: &Path, grid: Grid3) -> CliResult<FieldHistory> {
        let file = std::fs::File::open(path)
            .map_err(|e| CliError::Config(format!("fields.snapshot: {}: {e}", path.display())))?;
        let snap = Snapshot::read(&mut std::io::BufReader::new(file))
            .map_err(|e| CliError::config("fields.snapshot", e))?;
        if snap.grid != grid {
            return Err(CliError::Config("fields.snapshot: grid differs from `grid`".into()));
        }
        let vector = |name: &str| -> CliResult<Option<VectorField>> {
            match snap.field(name) {
                None => Ok(None),
                Some(f) if f.components == 3 => Ok(Some(VectorField::from_data(f.data.clone()))),
                Some(_) => Err(CliError::Config(format!("fields.snapshot: {name} must have 3 components"))),
            }
        };
        let e = vector("E")?.ok_or_else(|| missing("fields.snapshot: E"))?;
        let b = vector("B")?.ok_or_else(|| missing("fields.snapshot: B"))?;
        let (t0, dt, n) = match &self.time {
            Some(t) => (t.t0, t.dt, t.samples),
            None => (snap.time, 1.0, 3),
        };
        let mut h = FieldHistory::from_eb(grid, t0, dt, vec![e; n], vec![b; n])
            .map_err(|e| CliError::config("time", e))?;
        h.d = vector("D")?.map(|f| vec![f; n]);
        h.h = vector("H")?.map(|f| vec![f; n]);
        h.j = vector("j")?.map(|f| vec![f; n]);
        h.rho = match snap.field("rho") {
            Some(f) if f.components == 1 => Some(vec![ScalarField::from_data(f.data.clone()); n]),
            Some(_) => return Err(CliError::Config("fields.snapshot: rho must be scalar".into())),
            None => None,
        };
        Ok(h)
    }

    /// History with sources: explicit `[sources]` or synthesized by the law.
    pub fn history_with_sources(
        &self,
        base: &Path,
        law: &ConstitutiveLaw,
        k: &Constants,
        scheme: Scheme,
    ) -> CliResult<FieldHistory> {
        let mut h = self.history(base, scheme)?;
        match &self.sources {
            Some(s) => {
                let (rho, j) = self.source_fields(&h.grid, s, &h.times())?;
                h.rho = Some(rho);
                h.j = Some(j);
                if h.d.is_none() {
                    let (d, hh) = constitutive_series(&h, law, k)?;
                    h.d = Some(d);
                    h.h = Some(hh);
                }
                Ok(h)
            }
            None if h.rho.is_some() && h.j.is_some() && h.d.is_some() => Ok(h),
            None => synthesize_sources(&h, law, k, scheme).map_err(|e| CliError::config("law", e)),
        }
    }

    fn source_fields(
        &self,
        grid: &Grid3,
        s: &SourceSpec,
        times: &[f64],
    ) -> CliResult<(Vec<ScalarField>, Vec<VectorField>)> {
        let rho = scalar_expr(s.rho.as_deref().unwrap_or("0"), "sources.rho")?;
        let zero = ["0".to_string(), "0".to_string(), "0".to_string()];
        let j = VecExpr::parse(s.j.as_ref().unwrap_or(&zero), "sources.j")?;
        Ok((
            times.iter().map(|&t| ScalarField::from_fn(grid, |x| eval_scalar(&rho, x, t))).collect(),
            times.iter().map(|&t| VectorField::from_fn(grid, |x| j.eval(x, t))).collect(),
        ))
    }

    /// Static sources at `t = 0` from the `sources` table.
    pub fn static_sources(&self) -> CliResult<(ScalarField, VectorField)> {
        let s = self.sources.as_ref().ok_or_else(|| missing("sources"))?;
        let grid = self.grid()?;
        let (mut rho, mut j) = self.source_fields(&grid, s, &[0.0])?;
        Ok((rho.remove(0), j.remove(0)))
    }

    pub fn vector_expr_field(&self, src: &[String; 3], key: &str) -> CliResult<VectorField> {
        let grid = self.grid()?;
        let e = VecExpr::parse(src, key)?;
        Ok(VectorField::from_fn(&grid, |x| e.eval(x, 0.0)))
    }

    pub fn quantum(&self) -> CliResult<&QuantumSpec> {
        self.quantum.as_ref().ok_or_else(|| missing("quantum"))
    }

    pub fn boost(&self) -> CliResult<&BoostSpec> {
        self.boost.as_ref().ok_or_else(|| missing("boost"))
    }

    pub fn point(&self) -> CliResult<&PointSpec> {
        self.point.as_ref().ok_or_else(|| missing("point"))
    }
}

impl QuantumSpec {
    /// External potentials sampled at `t0 + n dt` for `n = 0..=steps`.
    pub fn external(&self, grid: &Grid3, dt: f64, steps: usize) -> CliResult<Option<Potentials>> {
        let Some(p) = &self.potentials else {
            return Ok(None);
        };
        let phi = scalar_expr(&p.phi, "quantum.potentials.phi")?;
        let a = VecExpr::parse(&p.a, "quantum.potentials.a")?;
        Potentials::sample(*grid, 0.0, dt, steps + 1, |x, t| (eval_scalar(&phi, x, t), a.eval(x, t)))
            .map(Some)
            .map_err(|e| CliError::config("quantum.potentials", e))
    }
}

fn sample_vec(h: &FieldHistory, e: &VecExpr) -> Vec<VectorField> {
    h.times().iter().map(|&t| VectorField::from_fn(&h.grid, |x| e.eval(x, t))).collect()
}

fn constitutive_series(
    h: &FieldHistory,
    law: &ConstitutiveLaw,
    k: &Constants,
) -> CliResult<(Vec<VectorField>, Vec<VectorField>)> {
    let mut d = Vec::with_capacity(h.len());
    let mut hh = Vec::with_capacity(h.len());
    for (e, b) in h.e.iter().zip(&h.b) {
        let mut df = VectorField::zeros(&h.grid);
        let mut hf = VectorField::zeros(&h.grid);
        for i in 0..h.grid.len() {
            let (dv, hv) = law.eval_mn(e.get(i), b.get(i), k).map_err(|e| CliError::config("law", e))?;
            df.set(i, dv);
            hf.set(i, hv);
        }
        d.push(df);
        hh.push(hf);
    }
    Ok((d, hh))
}
