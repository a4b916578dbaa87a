use serde::{Deserialize, Serialize};

use super::magnetic::{coulomb_potentials, fields_from_static_potentials, transverse_part};
use crate::discrete::{
    potentials_to_fields, DiffOps, FieldHistory, GridField, Potentials, ScalarField, Scheme,
    VectorField,
};
use crate::em::Constants;
use crate::error::{Error, Result};
use crate::quantum::{densities_with, DGParams, SchrodingerStepper, WaveFunction};

const NORM_DRIFT_LIMIT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceModel {
    /// Fields from the magnetic limit of the particle's own densities.
    #[default]
    MagneticLimit,
    /// Externally supplied potentials; no back-reaction.
    PrescribedPotentials,
}

/// How `|psi|^2` enters the field equations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChargeConvention {
    /// `|psi|^2` is a probability density; sources are `e rho` and `e J`.
    #[default]
    Probability,
    /// `|psi|^2` and `J` are used as charge and current densities directly.
    Charge,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingConfig {
    pub dt: f64,
    pub steps: usize,
    pub picard_iters: usize,
    pub source_model: SourceModel,
    pub charge_convention: ChargeConvention,
    /// Record every n-th step (the initial state is always recorded).
    pub record_every: usize,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            steps: 100,
            picard_iters: 2,
            source_model: SourceModel::MagneticLimit,
            charge_convention: ChargeConvention::Probability,
            record_every: 1,
        }
    }
}

impl CouplingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::BadParams(format!("dt = {} must be positive", self.dt)));
        }
        if self.picard_iters == 0 {
            return Err(Error::BadParams("picard_iters must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::BadParams("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Recorded states of a coupled run. `fields` holds `E`, `B` and the
/// sources that fed the field equations at each recorded time.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub fields: FieldHistory,
    pub potentials: Potentials,
    pub states: Vec<WaveFunction>,
    pub norms: Vec<f64>,
    pub total_charge: Vec<f64>,
}

struct Sources {
    rho: ScalarField,
    j: VectorField,
}

struct Coupler<'a> {
    ops: DiffOps,
    k: &'a Constants,
    dg: DGParams,
    convention: ChargeConvention,
}

impl Coupler<'_> {
    fn charge_scale(&self, wf: &WaveFunction) -> f64 {
        match self.convention {
            ChargeConvention::Probability => wf.particle.e,
            ChargeConvention::Charge => 1.0,
        }
    }

    fn sources(&self, wf: &WaveFunction, a: Option<&VectorField>) -> Result<Sources> {
        let (rho, j) = densities_with(&self.ops, wf, a, self.dg.d)?;
        let s = self.charge_scale(wf);
        Ok(Sources {
            rho: rho.scaled(s),
            j: j.scaled(s),
        })
    }

    fn average(a: &Sources, b: &Sources) -> Sources {
        let mut rho = a.rho.scaled(0.5);
        rho.axpy(0.5, &b.rho);
        let mut j = a.j.scaled(0.5);
        j.axpy(0.5, &b.j);
        Sources { rho, j }
    }

    /// Coulomb-gauge potentials of the neutralized charge and the
    /// transverse current.
    fn potentials(&self, s: &Sources) -> Result<(ScalarField, VectorField)> {
        let mean = s.rho.mean();
        let rho: ScalarField = ScalarField::from_data(s.rho.data().iter().map(|r| r - mean).collect());
        let jt = transverse_part(&self.ops, &s.j)?;
        coulomb_potentials(&self.ops, &rho, &jt, self.k)
    }
}

fn check_norm(wf: &WaveFunction) -> Result<f64> {
    let n = wf.norm();
    if !((n - 1.0).abs() <= NORM_DRIFT_LIMIT) {
        return Err(Error::NormDrift(n - 1.0));
    }
    Ok(n)
}

/// Staggered Schrödinger–Maxwell evolution.
///
/// Each step advances `psi` with the current potential estimate, recomputes
/// the potentials from the sources averaged over the step, and repeats
/// `picard_iters` times. With [`SourceModel::PrescribedPotentials`] the
/// potentials come from `external` (one sample, or one per step) and no
/// back-reaction is computed.
pub fn evolve_coupled(
    psi0: &WaveFunction,
    dg: &DGParams,
    cfg: &CouplingConfig,
    k: &Constants,
    external: Option<&Potentials>,
) -> Result<Trajectory> {
    cfg.validate()?;
    dg.validate()?;
    let grid = psi0.grid;
    check_norm(psi0)?;
    let coupler = Coupler {
        ops: DiffOps::new(&grid, Scheme::Spectral),
        k,
        dg: *dg,
        convention: cfg.charge_convention,
    };
    let mut stepper = SchrodingerStepper::new(&grid, *dg, cfg.dt)?;

    let external_at = |n: usize| -> Result<Option<(ScalarField, VectorField)>> {
        match cfg.source_model {
            SourceModel::MagneticLimit => Ok(None),
            SourceModel::PrescribedPotentials => {
                let p = external.ok_or_else(|| {
                    Error::BadParams("prescribed potentials were not supplied".into())
                })?;
                if p.grid != grid {
                    return Err(Error::InvalidGrid("potential grid differs from wavefunction".into()));
                }
                let idx = if p.len() == 1 { 0 } else { n };
                if idx >= p.len() {
                    return Err(Error::TooFewTimeSamples {
                        needed: cfg.steps + 1,
                        got: p.len(),
                    });
                }
                Ok(Some((p.phi[idx].clone(), p.a[idx].clone())))
            }
        }
    };
    if let (SourceModel::PrescribedPotentials, Some(p)) = (cfg.source_model, external) {
        if p.len() != 1 && p.len() < cfg.steps + 1 {
            return Err(Error::TooFewTimeSamples {
                needed: cfg.steps + 1,
                got: p.len(),
            });
        }
    }

    let mut wf = psi0.clone();
    let (mut phi, mut a) = match external_at(0)? {
        Some(p) => p,
        None => {
            // one refinement so the current sees its own vector potential
            let (_, a0) = coupler.potentials(&coupler.sources(&wf, None)?)?;
            coupler.potentials(&coupler.sources(&wf, Some(&a0))?)?
        }
    };

    let mut rec_phi = Vec::new();
    let mut rec_a = Vec::new();
    let mut rec_rho = Vec::new();
    let mut rec_j = Vec::new();
    let mut states = Vec::new();
    let mut norms = Vec::new();
    let mut total_charge = Vec::new();
    let cell = grid.cell_volume();
    let mut record = |wf: &WaveFunction, phi: &ScalarField, a: &VectorField| -> Result<()> {
        let s = coupler.sources(wf, Some(a))?;
        total_charge.push(s.rho.data().iter().sum::<f64>() * cell);
        rec_rho.push(s.rho);
        rec_j.push(s.j);
        rec_phi.push(phi.clone());
        rec_a.push(a.clone());
        norms.push(wf.norm());
        states.push(wf.clone());
        Ok(())
    };
    record(&wf, &phi, &a)?;

    for n in 0..cfg.steps {
        let next = match external_at(n + 1)? {
            Some((phi_next, a_next)) => {
                let mut trial = wf.clone();
                stepper.step(&mut trial, Some(&phi), Some(&a))?;
                phi = phi_next;
                a = a_next;
                trial
            }
            None => {
                let start = coupler.sources(&wf, Some(&a))?;
                let (mut phi_mid, mut a_mid) = (phi.clone(), a.clone());
                let mut trial = wf.clone();
                for p in 0..cfg.picard_iters {
                    trial = wf.clone();
                    stepper.step(&mut trial, Some(&phi_mid), Some(&a_mid))?;
                    if p + 1 < cfg.picard_iters {
                        let end = coupler.sources(&trial, Some(&a_mid))?;
                        (phi_mid, a_mid) = coupler.potentials(&Coupler::average(&start, &end))?;
                    }
                }
                let end = coupler.sources(&trial, Some(&a_mid))?;
                (phi, a) = coupler.potentials(&end)?;
                trial
            }
        };
        wf = next;
        check_norm(&wf)?;
        if (n + 1) % cfg.record_every == 0 {
            record(&wf, &phi, &a)?;
        }
    }

    let hist_dt = cfg.dt * cfg.record_every as f64;
    let potentials = Potentials::new(grid, 0.0, hist_dt, rec_phi, rec_a)?;
    let (e, b) = if potentials.len() >= 3 {
        potentials_to_fields(&potentials, Scheme::Spectral)?
    } else {
        let mut e = Vec::new();
        let mut b = Vec::new();
        for i in 0..potentials.len() {
            let (ei, bi) =
                fields_from_static_potentials(&coupler.ops, &potentials.phi[i], &potentials.a[i])?;
            e.push(ei);
            b.push(bi);
        }
        (e, b)
    };
    let mut fields = FieldHistory::from_eb(grid, 0.0, hist_dt, e, b)?;
    fields.rho = Some(rec_rho);
    fields.j = Some(rec_j);
    fields.meta.notes.push(format!(
        "coupled evolution: {:?}, {:?}",
        cfg.source_model, cfg.charge_convention
    ));
    Ok(Trajectory {
        fields,
        potentials,
        states,
        norms,
        total_charge,
    })
}
