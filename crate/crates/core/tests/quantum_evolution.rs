use galem_core::quantum::{
    apply_gauge, densities, init_wavefunction, DGParams, InitialState, Particle,
    SchrodingerStepper, WaveFunction,
};
use galem_core::transforms::boost_wavefunction;
use galem_core::{Grid3, Potentials, ScalarField, Vec3};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::TAU;

fn free_gaussian() -> WaveFunction {
    let g = Grid3::new([256, 4, 4], [40.0, 1.0, 1.0]).unwrap();
    let s = InitialState::Gaussian {
        center: Vec3::new(20.0, 0.0, 0.0),
        width: 1.0,
        axes: [true, false, false],
        k: Vec3::ZERO,
    };
    init_wavefunction(&s, &g, Particle::natural(0.0)).unwrap()
}

// strictly positive and periodic, so the bracket never divides by a vanishing density
fn smooth_packet() -> WaveFunction {
    let g = Grid3::new([64, 4, 4], [20.0, 1.0, 1.0]).unwrap();
    let q = TAU / 20.0;
    let psi = (0..g.len())
        .map(|i| {
            let x = g.position(i).x;
            Complex64::from_polar((0.6 * (q * x).cos()).exp(), 0.4 * (q * x).sin())
        })
        .collect();
    let mut wf = WaveFunction::new(g, psi, Particle::natural(0.0)).unwrap();
    wf.normalize().unwrap();
    wf
}

fn subfamily() -> DGParams {
    DGParams {
        d: 0.05,
        d_prime: 0.1,
        c1: 1.0,
        c2: 0.5,
        c3: 0.0,
        c4: -1.0,
        c5: 0.2,
    }
}

fn max_density_gap(a: &WaveFunction, b: &WaveFunction) -> f64 {
    a.psi
        .iter()
        .zip(&b.psi)
        .fold(0.0f64, |m, (x, y)| m.max((x.norm_sqr() - y.norm_sqr()).abs()))
}

fn evolve(wf: &mut WaveFunction, dg: DGParams, dt: f64, steps: usize) {
    let mut st = SchrodingerStepper::new(&wf.grid, dg, dt).unwrap();
    for _ in 0..steps {
        st.step(wf, None, None).unwrap();
    }
}

#[test]
fn free_gaussian_spreads_analytically() {
    let mut wf = free_gaussian();
    evolve(&mut wf, DGParams::linear(), 1e-3, 2000);
    let sigma = wf.width(0, 20.0);
    let want = 2.0f64.sqrt();
    assert!((sigma / want - 1.0).abs() <= 1e-3, "sigma {sigma}");
}

#[test]
fn norm_is_conserved_linear_and_dg_subfamily() {
    assert!(subfamily().galilean_subfamily());
    let mut wf = free_gaussian();
    evolve(&mut wf, DGParams::linear(), 1e-3, 1000);
    assert!((wf.norm() - 1.0).abs() < 1e-8, "linear: {}", wf.norm());
    let mut wf = smooth_packet();
    evolve(&mut wf, subfamily(), 1e-3, 1000);
    assert!((wf.norm() - 1.0).abs() < 1e-8, "subfamily: {}", wf.norm());
}

#[test]
fn zero_dg_params_match_linear_evolution() {
    let mut a = free_gaussian();
    let mut b = a.clone();
    evolve(&mut a, DGParams::linear(), 1e-3, 50);
    evolve(&mut b, DGParams { d_prime: 3.0, ..Default::default() }, 1e-3, 50);
    for (x, y) in a.psi.iter().zip(&b.psi) {
        assert!((x - y).norm() < 1e-12);
    }
}

fn boost_gap(dg: DGParams) -> f64 {
    let psi0 = smooth_packet();
    let v = Vec3::new(TAU / 20.0, 0.0, 0.0);
    let (dt, steps) = (1e-3, 300);
    let t = dt * steps as f64;

    let mut a = psi0.clone();
    evolve(&mut a, dg, dt, steps);
    let a = boost_wavefunction(&a, v, t).unwrap();

    let mut b = boost_wavefunction(&psi0, v, 0.0).unwrap();
    evolve(&mut b, dg, dt, steps);
    max_density_gap(&a, &b)
}

#[test]
fn dg_subfamily_commutes_with_boosts() {
    let err = boost_gap(subfamily());
    assert!(err < 1e-6, "{err}");
}

#[test]
fn dg_outside_subfamily_breaks_boost_commutation() {
    let dg = DGParams {
        d_prime: 0.1,
        c1: 1.0,
        ..Default::default()
    };
    assert!(!dg.galilean_subfamily());
    let err = boost_gap(dg);
    assert!(err > 1e-6, "{err}");
}

fn smooth_state(g: &Grid3, amp: f64, phase: f64) -> WaveFunction {
    let psi = (0..g.len())
        .map(|i| {
            let x = g.position(i);
            Complex64::from_polar((amp * x.x.cos() + 0.3 * x.y.sin()).exp(), phase * x.y.sin() + x.x)
        })
        .collect();
    let mut wf = WaveFunction::new(*g, psi, Particle::new(1.3, 0.6, 0.9).unwrap()).unwrap();
    wf.normalize().unwrap();
    wf
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn densities_are_gauge_invariant(
        amp in 0.0..0.6f64,
        phase in -0.5..0.5f64,
        l1 in -0.4..0.4f64,
        l2 in -0.4..0.4f64,
        d in 0.0..0.2f64,
    ) {
        let g = Grid3::new([48, 48, 4], [TAU, TAU, 1.0]).unwrap();
        let wf = smooth_state(&g, amp, phase);
        let pot = Potentials::sample(g, 0.0, 1e-3, 3, |x, t| {
            (x.y.cos() * t, Vec3::new(0.4 * x.y.sin(), 0.2, 0.1 * x.x.cos()))
        })
        .unwrap();
        let lambda: Vec<ScalarField> = (0..3)
            .map(|k| ScalarField::from_fn(&g, |x| l1 * x.x.sin() + l2 * (x.y - 0.01 * k as f64).cos()))
            .collect();
        let (w2, p2) = apply_gauge(&wf, &pot, &lambda, 1).unwrap();
        let (r1, j1) = densities(&wf, Some(&pot.a[1]), d).unwrap();
        let (r2, j2) = densities(&w2, Some(&p2.a[1]), d).unwrap();
        for i in 0..g.len() {
            prop_assert!((r1[i] - r2[i]).abs() < 1e-12);
            prop_assert!((j1.get(i) - j2.get(i)).norm() < 1e-12);
        }
    }
}
