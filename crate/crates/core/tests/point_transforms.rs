use galem_core::em::{galilean_invariants, lorentz_invariants};
use galem_core::em::invariants::{galilean_scales, lorentz_scales};
use galem_core::transforms::{
    galilean_boost_event, limit_gap, lorentz_boost_event, magnetic_limit_boost_sources,
};
use galem_core::{Constants, PointEMField, SourceDensity, Vec3};
use proptest::prelude::*;

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn field() -> impl Strategy<Value = PointEMField> {
    (vec3(10.0), vec3(10.0), vec3(10.0), vec3(10.0)).prop_map(|(e, b, d, h)| PointEMField::new(e, b, d, h))
}

fn source() -> impl Strategy<Value = SourceDensity> {
    (-10.0..10.0f64, vec3(10.0)).prop_map(|(r, j)| SourceDensity::new(r, j))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn galilean_boosts_preserve_invariants(f in field(), v in vec3(50.0)) {
        let (g, _) = galilean_boost_event(&f, &SourceDensity::default(), v);
        let a = galilean_invariants(&f).unwrap().values;
        let b = galilean_invariants(&g).unwrap().values;
        let sc = galilean_scales(&f, v.norm());
        for i in 0..6 {
            prop_assert!((a[i] - b[i]).abs() <= 1e-13 * sc[i], "I{}: {} vs {}", i + 1, a[i], b[i]);
        }
    }

    #[test]
    fn galilean_boosts_compose_additively(f in field(), s in source(), v1 in vec3(5.0), v2 in vec3(5.0)) {
        let (f1, s1) = galilean_boost_event(&f, &s, v1);
        let (f12, s12) = galilean_boost_event(&f1, &s1, v2);
        let (fs, ss) = galilean_boost_event(&f, &s, v1 + v2);
        let scale = 1.0 + f.components().iter().chain(s.components().iter()).fold(0.0f64, |m, x| m.max(x.abs()));
        for (a, b) in f12.components().iter().zip(fs.components()).chain(s12.components().iter().zip(ss.components())) {
            prop_assert!((a - b).abs() <= 1e-14 * scale * 25.0);
        }
    }

    #[test]
    fn lorentz_boosts_preserve_invariants(f in field(), axis in 0usize..3, frac in -0.9..0.9f64, c in 0.5..50.0f64) {
        let k = Constants::with_c(c).unwrap();
        let mut v = [0.0; 3];
        v[axis] = frac * c;
        let v = Vec3::from_array(v);
        let (g, _) = lorentz_boost_event(&f, &SourceDensity::default(), v, &k).unwrap();
        let a = lorentz_invariants(&f, &k).unwrap().values;
        let b = lorentz_invariants(&g, &k).unwrap().values;
        let sc = lorentz_scales(&f, &k);
        for i in 0..6 {
            prop_assert!((a[i] - b[i]).abs() <= 1e-10 * sc[i], "I{}", i + 1);
        }
    }

    #[test]
    fn lorentz_sources_keep_the_interval(s in source(), v in vec3(0.5)) {
        // c^2 rho^2 - |j|^2 is invariant
        let k = Constants::unit();
        let (_, t) = lorentz_boost_event(&PointEMField::default(), &s, v, &k).unwrap();
        let a = s.rho * s.rho - s.j.norm_sq();
        let b = t.rho * t.rho - t.j.norm_sq();
        prop_assert!((a - b).abs() <= 1e-10 * (s.rho * s.rho + s.j.norm_sq()).max(1.0) * 10.0);
    }

    #[test]
    fn magnetic_limit_differs_from_galilean_sources(s in source(), v in vec3(3.0)) {
        let k = Constants::unit();
        let m = magnetic_limit_boost_sources(&s, v, &k);
        let (_, g) = galilean_boost_event(&PointEMField::default(), &s, v);
        prop_assert_eq!(m.j, s.j);
        prop_assert_eq!(g.rho, s.rho);
        prop_assert!((m.rho - (s.rho - v.dot(s.j))).abs() < 1e-12);
    }
}

#[test]
fn limit_gap_slope_over_four_decades() {
    let f = PointEMField::new(
        Vec3::new(0.3, -1.2, 0.7),
        Vec3::new(1.1, 0.4, -0.5),
        Vec3::new(-0.2, 0.9, 0.3),
        Vec3::new(0.6, 0.1, -1.4),
    );
    let s = SourceDensity::new(0.8, Vec3::new(-0.3, 0.5, 1.0));
    let v = Vec3::new(0.6, 0.0, 0.8);
    let cs = [10.0, 1e2, 1e3, 1e4];
    let gaps = limit_gap(&f, &s, v, &cs).unwrap();
    let slope = galem_core::stats::loglog_slope(&cs, &gaps);
    assert!((slope + 2.0).abs() < 0.05, "slope {slope}");
}
