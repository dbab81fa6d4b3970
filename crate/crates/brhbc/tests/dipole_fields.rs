use brhbc::dipole::{
    fields_at, radial_poynting, radiated_power, radiation_zone_radius, region_classify,
    DipoleSource, FieldPoint, Medium, Region,
};
use brhbc::{Cx, Error};
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

fn src(i: f64, l: f64, f: f64) -> DipoleSource<f64> {
    DipoleSource::new(Cx::new(i, 0.0), l, f).unwrap()
}

fn slope(lo: f64, hi: f64) -> f64 {
    let f = 1e8;
    let m = Medium::free_space();
    let b = m.beta(f);
    let s = src(1e-3, 1e-3, f);
    let pts: Vec<(f64, f64)> = (0..41)
        .map(|k| {
            let r = lo * (hi / lo).powf(k as f64 / 40.0) / b;
            let e = fields_at(&s, &m, &FieldPoint::broadside(r)).unwrap();
            (r.ln(), e.e_theta.norm().ln())
        })
        .collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    num / den
}

#[test]
fn slope_laws() {
    assert!((slope(1e-4, 1e-2) + 3.0).abs() <= 0.05);
    assert!((slope(1e2, 1e4) + 1.0).abs() <= 0.05);
}

#[test]
fn far_field_wave_impedance() {
    let m = Medium::free_space();
    let f = 1e8;
    // r = 10 m is beta*r ~ 21
    let e = fields_at(&src(1.0, 1e-2, f), &m, &FieldPoint::broadside(10.0)).unwrap();
    let z = e.e_theta.norm() / e.h_phi.norm();
    assert!((z / m.eta() - 1.0).abs() < 5e-3, "{z}");
}

#[test]
fn zero_components() {
    let m = Medium::free_space();
    let e = fields_at(&src(1.0, 1e-2, 1e8), &m, &FieldPoint::new(2.0, 0.7, 1.1)).unwrap();
    for c in [e.e_phi, e.h_r, e.h_theta] {
        assert_eq!(c, Cx::new(0.0, 0.0));
    }
    let b = fields_at(&src(1.0, 1e-2, 1e8), &m, &FieldPoint::broadside(2.0)).unwrap();
    assert_eq!(b.e_r, Cx::new(0.0, 0.0));
}

#[test]
fn radiation_zone_radius_is_inverse_beta() {
    let m = Medium::new(4.0).unwrap();
    let f: f64 = 75e6;
    assert!((radiation_zone_radius(&m, f) * m.beta(f) - 1.0).abs() < 1e-15);
    assert!((radiation_zone_radius(&Medium::<f64>::free_space(), f) - 0.6362).abs() < 1e-3);
}

#[test]
fn region_boundaries_are_monotone() {
    let m = Medium::free_space();
    let f = 1e8;
    let mut last = Region::Near;
    for k in 0..200 {
        let r = 1e-4 * 10f64.powf(k as f64 * 0.04);
        let now = region_classify(&m, r, f).unwrap();
        assert!(now >= last);
        last = now;
    }
    assert_eq!(last, Region::Far);
}

/// Poynting flux through a sphere, midpoint rule in theta.
fn sphere_power(s: &DipoleSource<f64>, m: &Medium<f64>, r: f64) -> f64 {
    let n = 2000;
    let dth = PI / n as f64;
    (0..n)
        .map(|k| {
            let th = (k as f64 + 0.5) * dth;
            let e = fields_at(s, m, &FieldPoint::new(r, th, 0.0)).unwrap();
            radial_poynting(&e) * 2.0 * PI * r * r * th.sin() * dth
        })
        .sum()
}

#[test]
fn power_closes_at_all_distances() {
    let m = Medium::free_space();
    let f = 1e8;
    let s = src(0.5, 1e-2, f);
    let b = m.beta(f);
    let want = m.eta() * (b * 0.5 * 1e-2).powi(2) / (12.0 * PI);
    assert!((radiated_power(&s, &m) / want - 1.0).abs() < 1e-12);
    for br in [0.01, 1.0, 100.0] {
        let p = sphere_power(&s, &m, br / b);
        assert!((p / want - 1.0).abs() < 1e-5, "beta r = {br}: {p} vs {want}");
    }
}

#[test]
fn invalid_inputs() {
    let m = Medium::free_space();
    assert!(DipoleSource::new(Cx::new(1.0, 0.0), 0.0, 1e8).is_err());
    assert!(DipoleSource::new(Cx::new(1.0, 0.0), 1e-2, 0.0).is_err());
    assert!(matches!(Medium::new(0.5), Err(Error::Invariant(_))));
    assert!(fields_at(&src(1.0, 1e-2, 1e8), &m, &FieldPoint::broadside(0.0)).is_err());
}

#[test]
fn long_dipole_warns() {
    let m = Medium::free_space();
    assert!(src(1.0, 1.0, 1e8).short_dipole_warning(&m).is_some());
    assert!(src(1.0, 1e-2, 1e8).short_dipole_warning(&m).is_none());
}

#[test]
fn f32_fields_track_f64() {
    let m64 = Medium::<f64>::free_space();
    let m32 = Medium::<f32>::free_space();
    let s64 = src(1e-3, 1e-2, 1e8);
    let s32 = DipoleSource::new(Cx::new(1e-3f32, 0.0), 1e-2, 1e8).unwrap();
    for r in [0.05, 0.5, 5.0] {
        let a = fields_at(&s64, &m64, &FieldPoint::new(r, 1.0, 0.0)).unwrap();
        let b = fields_at(&s32, &m32, &FieldPoint::new(r as f32, 1.0, 0.0)).unwrap();
        assert!((b.e_magnitude() as f64 / a.e_magnitude() - 1.0).abs() < 1e-4);
        assert!((b.h_phi.norm() as f64 / a.h_phi.norm() - 1.0).abs() < 1e-4);
    }
}

proptest! {
    #[test]
    fn fields_are_linear_in_moment(
        scale in 0.01f64..100.0,
        phase in 0.0f64..std::f64::consts::TAU,
        r in 0.01f64..100.0,
        theta in 0.05f64..3.1,
    ) {
        let m = Medium::free_space();
        let base = src(1e-3, 1e-2, 1e8);
        let k = Cx::from_polar(scale, phase);
        let scaled = DipoleSource::new(base.current * k, 1e-2, 1e8).unwrap();
        let p = FieldPoint::new(r, theta, 0.0);
        let a = fields_at(&base, &m, &p).unwrap();
        let b = fields_at(&scaled, &m, &p).unwrap();
        for (x, y) in [(a.e_r, b.e_r), (a.e_theta, b.e_theta), (a.h_phi, b.h_phi)] {
            prop_assert!((x * k - y).norm() <= 1e-12 * y.norm().max(1e-300));
        }
    }

    #[test]
    fn broadside_e_theta_decreases(r1 in 0.001f64..100.0, step in 1.001f64..3.0) {
        let m = Medium::free_space();
        let s = src(1.0, 1e-2, 1e8);
        let a = fields_at(&s, &m, &FieldPoint::broadside(r1)).unwrap().e_theta.norm();
        let b = fields_at(&s, &m, &FieldPoint::broadside(r1 * step)).unwrap().e_theta.norm();
        prop_assert!(b < a);
    }

    #[test]
    fn fields_are_axisymmetric(phi in 0.0f64..std::f64::consts::TAU, r in 0.1f64..10.0) {
        let m = Medium::free_space();
        let s = src(1.0, 1e-2, 1e8);
        let a = fields_at(&s, &m, &FieldPoint::new(r, 1.0, 0.0)).unwrap();
        let b = fields_at(&s, &m, &FieldPoint::new(r, 1.0, phi)).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn broadside_angle_constant() {
    assert_eq!(FieldPoint::broadside(1.0).theta, FRAC_PI_2);
}
