//! Shared fixtures for the benchmarks.

use std::f64::consts::TAU;

use galem_core::quantum::{init_wavefunction, InitialState, Particle, WaveFunction};
use galem_core::residuals::synthesize_sources;
use galem_core::{Constants, ConstitutiveLaw, FieldHistory, Grid3, Scheme, Vec3, VectorField};

pub fn cube(n: usize) -> Grid3 {
    Grid3::cube(n, TAU).expect("valid grid")
}

pub fn smooth_field(grid: &Grid3) -> VectorField {
    VectorField::from_fn(grid, |x| {
        Vec3::new((x.y + x.z).sin(), (x.z - x.x).cos(), (x.x + 2.0 * x.y).sin())
    })
}

/// Manufactured CaseA history with synthesized sources.
pub fn case_a_history(n: [usize; 3]) -> FieldHistory {
    let g = Grid3::new(n, [TAU; 3]).expect("valid grid");
    let h = FieldHistory::sample_eb(g, 0.0, 1e-4, 5, |x, _| {
        (Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, 2.0 + x.x.sin()))
    })
    .expect("valid history");
    synthesize_sources(&h, &ConstitutiveLaw::case_a(), &Constants::unit(), Scheme::Spectral)
        .expect("MN law")
}

pub fn gaussian(points: usize) -> WaveFunction {
    let g = Grid3::new([points, 4, 4], [40.0, 1.0, 1.0]).expect("valid grid");
    let s = InitialState::Gaussian {
        center: Vec3::new(20.0, 0.0, 0.0),
        width: 1.0,
        axes: [true, false, false],
        k: Vec3::new(1.0, 0.0, 0.0),
    };
    init_wavefunction(&s, &g, Particle::natural(1.0)).expect("normalizable")
}
