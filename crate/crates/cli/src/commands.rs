use std::path::Path;

use galem_core::discrete::fs1::{fmt_f64, NamedField, Snapshot};
use galem_core::discrete::VectorField;
use galem_core::em::invariants::{galilean_scales, lorentz_scales};
use galem_core::em::{galilean_invariants, lorentz_invariants};
use galem_core::quantum::{densities, init_wavefunction, SchrodingerStepper, WaveFunction};
use galem_core::residuals::{
    continuity_residual, covariance_report, magnetic_limit_residuals, maxwell_residuals,
};
use galem_core::solvers::{
    evolve_coupled, solve_magnetic_limit, solve_static, trace_csv, SourceModel,
};
use galem_core::stats::loglog_slope;
use galem_core::transforms::{
    boost_event, galilean_boost_event, generate_boosted_solution, limit_gap, lorentz_boost_event,
    lorentz_boost_static_history, magnetic_limit_boosted_history, BoostKind, BoostParams,
};
use galem_core::{
    Constants, Error, FieldHistory, Grid3, PointEMField, Scheme, SourceDensity, Vec3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::artifacts::Artifacts;
use crate::config::{vec3, BoostModel, BoostSpec, Command, Scenario};
use crate::error::{CliError, CliResult};

pub struct Context<'a> {
    pub scenario: &'a Scenario,
    pub base: &'a Path,
    pub scheme: Scheme,
    pub out: &'a mut Artifacts,
}

/// Runs one subcommand; `Ok` carries the exit status (0, or 1 for a failed
/// verdict).
pub fn dispatch(cmd: Command, cx: &mut Context) -> CliResult<i32> {
    match cmd {
        Command::Invariants => invariants(cx),
        Command::Boost => boost(cx),
        Command::Residuals => residuals(cx),
        Command::Covariance => covariance(cx),
        Command::LimitStudy => limit_study(cx),
        Command::SolveMagnetic => solve_magnetic(cx),
        Command::SolveCaseA => solve_case_a(cx),
        Command::EvolveQuantum => evolve_quantum(cx),
        Command::EvolveCoupled => evolve_coupled_cmd(cx),
        Command::Manufacture => manufacture(cx),
    }
}

fn boost_params(b: &BoostSpec, k: &Constants) -> BoostParams {
    match b.kind {
        BoostKind::Galilean => BoostParams::galilean(vec3(b.v)),
        BoostKind::Lorentz => BoostParams::lorentz(vec3(b.v), *k),
    }
}

fn frame_snapshot(h: &FieldHistory, n: usize) -> Snapshot {
    let mut s = Snapshot::new(h.grid, h.time(n))
        .with(NamedField::vector("E", &h.e[n]))
        .with(NamedField::vector("B", &h.b[n]));
    if let Some(d) = &h.d {
        s = s.with(NamedField::vector("D", &d[n]));
    }
    if let Some(hh) = &h.h {
        s = s.with(NamedField::vector("H", &hh[n]));
    }
    if let Some(r) = &h.rho {
        s = s.with(NamedField::scalar("rho", &r[n]));
    }
    if let Some(j) = &h.j {
        s = s.with(NamedField::vector("j", &j[n]));
    }
    s
}

fn write_history(out: &mut Artifacts, dir: &str, h: &FieldHistory) -> CliResult<()> {
    for n in 0..h.len() {
        out.snapshot(&format!("{dir}/frame_{n:03}.fs1"), &frame_snapshot(h, n))?;
    }
    out.json(
        &format!("{dir}/history.json"),
        &json!({
            "grid": { "n": h.grid.n(), "l": h.grid.lengths() },
            "t0": h.t0,
            "dt": h.dt,
            "samples": h.len(),
            "law": h.meta.law,
            "notes": h.meta.notes,
            "interpolation_error": h.meta.interpolation_error,
        }),
    )
}

fn psi_snapshot(wf: &WaveFunction, t: f64) -> Snapshot {
    let mut data: Vec<f64> = wf.psi.iter().map(|c| c.re).collect();
    data.extend(wf.psi.iter().map(|c| c.im));
    Snapshot::new(wf.grid, t).with(NamedField {
        name: "psi".into(),
        components: 2,
        data,
    })
}

fn invariants(cx: &mut Context) -> CliResult<i32> {
    let sc = cx.scenario;
    let p = sc.point()?;
    let k = sc.constants()?;
    let f = PointEMField::new(vec3(p.e), vec3(p.b), vec3(p.d), vec3(p.h));
    let s = SourceDensity::new(p.rho, vec3(p.j));
    let lor = lorentz_invariants(&f, &k)?;
    let gal = galilean_invariants(&f)?;
    let mut doc = json!({
        "lorentz": lor.values,
        "galilean": gal.values,
    });
    if let Some(b) = &sc.boost {
        let bp = boost_params(b, &k);
        let (f2, s2) = boost_event(&f, &s, &bp)?;
        doc["boosted"] = json!({
            "v": b.v,
            "kind": b.kind,
            "field": f2.components(),
            "sources": s2.components(),
            "lorentz": lorentz_invariants(&f2, &k)?.values,
            "galilean": galilean_invariants(&f2)?.values,
        });
    }
    if p.random_boosts > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
        let (mut gal_err, mut lor_err) = (0.0f64, 0.0f64);
        let zero = SourceDensity::default();
        for _ in 0..p.random_boosts {
            let v = Vec3::new(
                rng.random_range(-p.max_speed..=p.max_speed),
                rng.random_range(-p.max_speed..=p.max_speed),
                rng.random_range(-p.max_speed..=p.max_speed),
            );
            let (g, _) = galilean_boost_event(&f, &zero, v);
            let after = galilean_invariants(&g)?.values;
            let sc6 = galilean_scales(&f, v.norm());
            for i in 0..6 {
                gal_err = gal_err.max((after[i] - gal.values[i]).abs() / sc6[i]);
            }
            let mut vl = [0.0; 3];
            vl[rng.random_range(0..3)] = rng.random_range(-0.9..=0.9) * k.c();
            let (l, _) = lorentz_boost_event(&f, &zero, Vec3::from_array(vl), &k)?;
            let after = lorentz_invariants(&l, &k)?.values;
            let sc6 = lorentz_scales(&f, &k);
            for i in 0..6 {
                lor_err = lor_err.max((after[i] - lor.values[i]).abs() / sc6[i]);
            }
        }
        doc["random"] = json!({
            "seed": sc.seed,
            "trials": p.random_boosts,
            "galilean_max_scaled_error": gal_err,
            "lorentz_max_relative_error": lor_err,
        });
    }
    cx.out.json("invariants.json", &doc)?;
    Ok(0)
}

fn boost(cx: &mut Context) -> CliResult<i32> {
    let sc = cx.scenario;
    let k = sc.constants()?;
    let b = sc.boost()?;
    let h = if sc.law.is_some() || sc.sources.is_some() {
        let law = sc.law_or("vacuum")?;
        sc.history_with_sources(cx.base, &law, &k, cx.scheme)?
    } else {
        sc.history(cx.base, cx.scheme)?
    };
    let v = vec3(b.v);
    let boosted = match (b.model, b.kind) {
        (BoostModel::Solution, BoostKind::Galilean) => generate_boosted_solution(&h, v)?,
        (BoostModel::Solution, BoostKind::Lorentz) => lorentz_boost_static_history(&h, v, &k)?,
        (BoostModel::MagneticLimit, _) => magnetic_limit_boosted_history(&h, v, &k)?,
    };
    write_history(cx.out, "boosted", &boosted)?;
    Ok(0)
}

fn residuals(cx: &mut Context) -> CliResult<i32> {
    let sc = cx.scenario;
    let k = sc.constants()?;
    let law = sc.law()?;
    let h = sc.history_with_sources(cx.base, &law, &k, cx.scheme)?;
    let rep = maxwell_residuals(&h, &law, &k, cx.scheme)?;
    cx.out.text("residuals.txt", &rep.to_text())?;
    cx.out.text("residuals.json", &rep.to_json())?;
    Ok(0)
}

fn covariance(cx: &mut Context) -> CliResult<i32> {
    let sc = cx.scenario;
    let k = sc.constants()?;
    let law = sc.law()?;
    let b = sc.boost()?;
    let h = sc.history_with_sources(cx.base, &law, &k, cx.scheme)?;
    let rep = covariance_report(
        &h,
        &law,
        &boost_params(b, &k),
        &k,
        cx.scheme,
        sc.verdict.unwrap_or_default(),
    )?;
    cx.out.text("verdict.txt", &rep.verdict_text())?;
    cx.out.text("original.txt", &rep.original.to_text())?;
    cx.out.text("boosted.txt", &rep.boosted.to_text())?;
    cx.out.json("covariance.json", &rep)?;
    Ok(if rep.covariant { 0 } else { 1 })
}

fn limit_study(cx: &mut Context) -> CliResult<i32> {
    let sc = cx.scenario;
    let p = sc.point()?;
    let l = sc.limit.as_ref().ok_or_else(|| CliError::Config("missing key `limit`".into()))?;
    let f = PointEMField::new(vec3(p.e), vec3(p.b), vec3(p.d), vec3(p.h));
    let s = SourceDensity::new(p.rho, vec3(p.j));
    let gaps = limit_gap(&f, &s, vec3(l.v), &l.c)?;
    let mut csv = String::from("c,gap\n");
    for (c, g) in l.c.iter().zip(&gaps) {
        csv.push_str(&format!("{},{}\n", fmt_f64(*c), fmt_f64(*g)));
    }
    cx.out.text("limit.csv", &csv)?;
    let slope = if l.c.len() >= 2 { Some(loglog_slope(&l.c, &gaps)) } else { None };
    cx.out.json("limit.json", &json!({ "v": l.v, "c": l.c, "gap": gaps, "slope": slope }))?;
    Ok(0)
}

fn solve_magnetic(cx: &mut Context) -> CliResult<i32> {
    let sc = cx.scenario;
    let k = sc.constants()?;
    let grid = sc.grid()?;
    let (rho, j) = sc.static_sources()?;
    let (e, b) = solve_magnetic_limit(&rho, &j, &grid, &k)?;
    let snap = Snapshot::new(grid, 0.0)
        .with(NamedField::vector("E", &e))
        .with(NamedField::vector("B", &b))
        .with(NamedField::scalar("rho", &rho))
        .with(NamedField::vector("j", &j));
    cx.out.snapshot("fields.fs1", &snap)?;
    let mut h = FieldHistory::from_eb(grid, 0.0, 1.0, vec![e; 3], vec![b; 3])?;
    h.rho = Some(vec![rho; 3]);
    h.j = Some(vec![j; 3]);
    let rep = magnetic_limit_residuals(&h, &k, cx.scheme)?;
    cx.out.text("residuals.txt", &rep.to_text())?;
    cx.out.json("residuals.json", &rep)?;
    Ok(0)
}

fn solve_case_a(cx: &mut Context) -> CliResult<i32> {
    let sc = cx.scenario;
    let k = sc.constants()?;
    let law = sc.law_or("case-a")?;
    let grid = sc.grid()?;
    let cfg = sc.newton.unwrap_or_default();
    let spec = sc.solve.clone().unwrap_or_default();
    let fields = sc.fields.as_ref().ok_or_else(|| CliError::Config("missing key `fields`".into()))?;

    let h = sc.history(cx.base, cx.scheme)?;
    let b = h.b[0].clone();
    let (j, manufactured_h) = if sc.sources.is_some() {
        (sc.static_sources()?.1, None)
    } else {
        if fields.e.is_none() {
            return Err(CliError::Config(
                "missing key `sources` (or `fields.e` to manufacture them)".into(),
            ));
        }
        let m = sc.history_with_sources(cx.base, &law, &k, cx.scheme)?;
        let hm = m.h.as_ref().map(|h| h[0].mean());
        (m.j.expect("synthesized")[0].clone(), hm)
    };
    let mean_h = spec.mean_h.map(vec3).or(manufactured_h);
    let guess = match &spec.guess {
        Some(g) => Some(sc.vector_expr_field(g, "solve.guess")?),
        None => None,
    };

    let result = solve_static(&law, &b, &j, &grid, &k, cx.scheme, &cfg, guess.as_ref(), mean_h);
    match result {
        Ok(sol) => {
            let snap = Snapshot::new(grid, 0.0)
                .with(NamedField::vector("E", &sol.e))
                .with(NamedField::vector("B", &b))
                .with(NamedField::vector("j", &j));
            cx.out.snapshot("solution.fs1", &snap)?;
            cx.out.text("trace.csv", &trace_csv(&sol.trace))?;
            cx.out.json(
                "summary.json",
                &json!({
                    "converged": true,
                    "law": law.name(),
                    "residual": sol.residual,
                    "iterations": sol.iterations,
                    "curl_e": sol.curl_e,
                }),
            )?;
            Ok(0)
        }
        Err(Error::NoConvergence {
            iterations,
            residual,
            history,
            best,
        }) => {
            let mut csv = String::from("iter,residual\n");
            for (i, r) in history.iter().enumerate() {
                csv.push_str(&format!("{i},{}\n", fmt_f64(*r)));
            }
            cx.out.text("trace.csv", &csv)?;
            if let Some(best) = &best {
                let snap = Snapshot::new(grid, 0.0).with(NamedField::vector("E", best));
                cx.out.snapshot("best.fs1", &snap)?;
            }
            cx.out.json(
                "summary.json",
                &json!({
                    "converged": false,
                    "law": law.name(),
                    "residual": residual,
                    "iterations": iterations,
                }),
            )?;
            Err(Error::NoConvergence {
                iterations,
                residual,
                history,
                best,
            }
            .into())
        }
        Err(e) => Err(e.into()),
    }
}

struct Observables {
    csv: String,
    reference: [f64; 3],
}

impl Observables {
    fn new(header: &'static str, grid: &Grid3) -> Self {
        let l = grid.lengths();
        Self {
            csv: format!("{header}\n"),
            reference: [0.5 * l[0], 0.5 * l[1], 0.5 * l[2]],
        }
    }

    /// Appends `prefix,norm,<x>,<sigma>,<J>`, tracking the packet center.
    fn record(&mut self, prefix: &str, wf: &WaveFunction, a: Option<&VectorField>, d: f64) -> CliResult<()> {
        let mut cols = vec![prefix.to_string(), fmt_f64(wf.norm())];
        let mut widths = Vec::with_capacity(3);
        for axis in 0..3 {
            let m = wf.mean_position(axis, self.reference[axis]);
            self.reference[axis] = m;
            cols.push(fmt_f64(m));
            widths.push(fmt_f64(wf.width(axis, m)));
        }
        cols.extend(widths);
        let (_, jgi) = densities(wf, a, d)?;
        let dv = wf.grid.cell_volume();
        for c in 0..3 {
            cols.push(fmt_f64(jgi.component(c).iter().sum::<f64>() * dv));
        }
        self.csv.push_str(&cols.join(","));
        self.csv.push('\n');
        Ok(())
    }
}

const QUANTUM_HEADER: &str = "step,t,norm,mean_x,mean_y,mean_z,sigma_x,sigma_y,sigma_z,j_x,j_y,j_z";

fn evolve_quantum(cx: &mut Context) -> CliResult<i32> {
    let sc = cx.scenario;
    let q = sc.quantum()?;
    let grid = sc.grid()?;
    let dt = q.dt.ok_or_else(|| CliError::Config("missing key `quantum.dt`".into()))?;
    let steps = q.steps.ok_or_else(|| CliError::Config("missing key `quantum.steps`".into()))?;
    if q.record_every == 0 {
        return Err(CliError::Config("quantum.record_every: must be positive".into()));
    }
    let mut wf = init_wavefunction(&q.initial, &grid, q.particle)?;
    let ext = q.external(&grid, dt, steps)?;
    let mut st = SchrodingerStepper::new(&grid, q.dg, dt)?;
    let mut obs = Observables::new(QUANTUM_HEADER, &grid);
    let a_at = |n: usize| ext.as_ref().map(|p| &p.a[n]);
    obs.record(&format!("0,{}", fmt_f64(0.0)), &wf, a_at(0), q.dg.d)?;
    let mut drift = 0.0f64;
    let mut failure = None;
    for n in 0..steps {
        let r = st.step(&mut wf, ext.as_ref().map(|p| &p.phi[n]), a_at(n));
        if let Err(e) = r {
            failure = Some(e);
            break;
        }
        drift = drift.max((wf.norm() - 1.0).abs());
        if (n + 1) % q.record_every == 0 || n + 1 == steps {
            let t = dt * (n + 1) as f64;
            obs.record(&format!("{},{}", n + 1, fmt_f64(t)), &wf, a_at(n + 1), q.dg.d)?;
        }
    }
    cx.out.text("observables.csv", &obs.csv)?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    cx.out.snapshot("final.fs1", &psi_snapshot(&wf, dt * steps as f64))?;
    cx.out.json(
        "summary.json",
        &json!({
            "steps": steps,
            "dt": dt,
            "final_norm": wf.norm(),
            "max_norm_drift": drift,
            "galilean_subfamily": q.dg.galilean_subfamily(),
        }),
    )?;
    Ok(0)
}

fn evolve_coupled_cmd(cx: &mut Context) -> CliResult<i32> {
    let sc = cx.scenario;
    let q = sc.quantum()?;
    let grid = sc.grid()?;
    let k = sc.constants()?;
    let cfg = sc.coupling.unwrap_or_default();
    let psi0 = init_wavefunction(&q.initial, &grid, q.particle)?;
    let ext = match cfg.source_model {
        SourceModel::PrescribedPotentials => q.external(&grid, cfg.dt, cfg.steps)?,
        SourceModel::MagneticLimit => None,
    };
    let traj = evolve_coupled(&psi0, &q.dg, &cfg, &k, ext.as_ref())?;
    let mut obs = Observables::new(
        "step,t,norm,mean_x,mean_y,mean_z,sigma_x,sigma_y,sigma_z,j_x,j_y,j_z,total_charge",
        &grid,
    );
    for (i, wf) in traj.states.iter().enumerate() {
        let step = (i * cfg.record_every).min(cfg.steps);
        let t = step as f64 * cfg.dt;
        obs.record(&format!("{step},{}", fmt_f64(t)), wf, Some(&traj.potentials.a[i]), q.dg.d)?;
        obs.csv.pop();
        obs.csv.push_str(&format!(",{}\n", fmt_f64(traj.total_charge[i])));
    }
    cx.out.text("observables.csv", &obs.csv)?;
    let last = traj.states.len() - 1;
    let t_end = traj.fields.time(last);
    cx.out.snapshot("final_psi.fs1", &psi_snapshot(&traj.states[last], t_end))?;
    let fields = Snapshot::new(grid, t_end)
        .with(NamedField::vector("E", &traj.fields.e[last]))
        .with(NamedField::vector("B", &traj.fields.b[last]))
        .with(NamedField::scalar("phi", &traj.potentials.phi[last]))
        .with(NamedField::vector("A", &traj.potentials.a[last]));
    cx.out.snapshot("final_fields.fs1", &fields)?;
    let drift = traj.norms.iter().fold(0.0f64, |m, n| m.max((n - 1.0).abs()));
    cx.out.json(
        "summary.json",
        &json!({
            "steps": cfg.steps,
            "dt": cfg.dt,
            "records": traj.states.len(),
            "source_model": cfg.source_model,
            "charge_convention": cfg.charge_convention,
            "max_norm_drift": drift,
        }),
    )?;
    Ok(0)
}

fn manufacture(cx: &mut Context) -> CliResult<i32> {
    let sc = cx.scenario;
    let k = sc.constants()?;
    let law = sc.law()?;
    let h = sc.history_with_sources(cx.base, &law, &k, cx.scheme)?;
    write_history(cx.out, "manufactured", &h)?;
    let rep = maxwell_residuals(&h, &law, &k, cx.scheme)?;
    cx.out.text("residuals.txt", &rep.to_text())?;
    let c = continuity_residual(&h, cx.scheme)?;
    cx.out.json("continuity.json", &c)?;
    Ok(0)
}
