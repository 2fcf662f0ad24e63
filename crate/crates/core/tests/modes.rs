mod common;

use std::f64::consts::PI;

use common::c;
use conical_dd::geometry::Material;
use conical_dd::modes::{
    classify_mode, detect_anomalous, fourier_coefficients, mode_range, synthesize_field, transverse_wavenumber,
    BoundaryTrace, FourierMode, ModeAmplitudes, ModeClass, ModeRange, Vec3, NEAR_ANOMALY_TOL,
};
use conical_dd::scenarios::academic;
use conical_dd::C64;
use proptest::prelude::*;

fn amps(entries: &[(i64, Vec3)]) -> ModeAmplitudes {
    let mut a = ModeAmplitudes::default();
    for (n, v) in entries {
        a.set_up(*n, *v);
    }
    a
}

fn dist(a: Vec3, b: Vec3) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).norm_sqr()).sum::<f64>().sqrt()
}

// Composite Simpson of trace(ξ)e^{−iqξ} on every linear piece.
fn simpson_coefficient(t: &BoundaryTrace, n: i64, sub: usize) -> Vec3 {
    let q = t.k1 + n as f64 * 2.0 * PI / t.period;
    let mut e = [c(0.0, 0.0); 3];
    for s in &t.segments {
        let h = (s.x1 - s.x0) / sub as f64;
        for j in 0..=sub {
            let w = if j == 0 || j == sub { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
            let x = s.x0 + j as f64 * h;
            let tt = (x - s.x0) / (s.x1 - s.x0);
            let ph = C64::new(0.0, -q * x).exp();
            for i in 0..3 {
                e[i] += (s.v0[i] * (1.0 - tt) + s.v1[i] * tt) * ph * (w * h / 3.0 / t.period);
            }
        }
    }
    e
}

#[test]
fn exact_hat_integration_matches_simpson() {
    let a = 1.3;
    let t = BoundaryTrace::sample(a, 0.7, 9, |x| [c(x.sin(), 0.2), c(1.0, x * x), c(-x, 0.5 * x.cos())]);
    let e = fourier_coefficients(&t, ModeRange::new(-6, 6));
    for n in -6..=6 {
        let s = simpson_coefficient(&t, n, 400);
        assert!(dist(e.up(n), s) < 1e-10, "order {n}: {:e}", dist(e.up(n), s));
    }
}

#[test]
fn single_order_trace_is_recovered() {
    let (a, k1) = (1.0, 0.4);
    let q = k1 + 2.0 * 2.0 * PI / a;
    let v = [c(1.0, -0.5), c(0.0, 0.0), c(0.3, 0.0)];
    let t = BoundaryTrace::sample(a, k1, 4000, |x| v.map(|z| z * C64::new(0.0, q * x).exp()));
    let e = fourier_coefficients(&t, ModeRange::new(-3, 3));
    // piecewise-linear interpolation damps by sinc²(qh/2)
    let h = a / 4000.0;
    let damp = (q * h / 2.0).sin() / (q * h / 2.0);
    assert!(dist(e.up(2), v.map(|z| z * damp * damp)) < 1e-12);
    for n in [-3, -2, -1, 0, 1, 3] {
        assert!(dist(e.up(n), [c(0.0, 0.0); 3]) < 1e-12, "order {n}");
    }
}

#[test]
fn parseval_for_a_modal_trace() {
    let (a, k1) = (2.0, 0.3);
    let modes = ModeRange::new(-2, 2).modes(k1, 0.1, c(3.0, 0.0), a);
    let src = amps(&[(-2, [c(0.1, 0.0), c(0.0, 0.2), c(0.0, 0.0)]), (0, [c(1.0, 0.0), c(0.0, 0.0), c(0.5, -0.5)]), (1, [c(0.0, 0.3); 3])]);
    let t = BoundaryTrace::sample(a, k1, 3000, |x| synthesize_field(&src, &modes, x, 0.0).unwrap());
    let e = fourier_coefficients(&t, ModeRange::new(-40, 40));
    assert!((e.power() - src.power()).abs() < 1e-5 * src.power());
    assert!((t.mean_square() - src.power()).abs() < 1e-5 * src.power());
}

#[test]
fn synthesis_analysis_round_trip() {
    let (a, k1, k3) = (1.0, 0.9, -0.4);
    let modes = ModeRange::new(-3, 3).modes(k1, k3, c(5.0, 0.0), a);
    let src = amps(&[(-1, [c(0.2, 0.1), c(0.0, 0.0), c(1.0, 0.0)]), (0, [c(0.7, 0.0), c(0.1, 0.1), c(0.0, -0.3)]), (3, [c(0.05, 0.0); 3])]);
    let t = BoundaryTrace::sample(a, k1, 2000, |x| synthesize_field(&src, &modes, x, 0.0).unwrap());
    let e = fourier_coefficients(&t, ModeRange::new(-3, 3));
    for n in -3..=3 {
        assert!(dist(e.up(n), src.up(n)) < 1e-4, "order {n}");
    }
    assert!(t.bloch_defect() < 1e-12);
}

#[test]
fn evanescent_orders_decay() {
    let (a, k1) = (1.0, 0.5);
    let k0 = c(2.0, 0.0);
    let modes = ModeRange::new(1, 1).modes(k1, 0.0, k0, a);
    assert_eq!(modes[0].class, ModeClass::Evanescent);
    let src = amps(&[(1, [c(1.0, 0.0); 3])]);
    let kappa = modes[0].k2n.im;
    for x2 in [0.1, 0.5, 2.0] {
        let v = synthesize_field(&src, &modes, 0.3, x2).unwrap();
        let expect = 3f64.sqrt() * (-kappa * x2).exp();
        assert!((dist(v, [c(0.0, 0.0); 3]) - expect).abs() < 1e-13);
    }
}

#[test]
fn synthesis_without_mode_is_an_error() {
    let modes = ModeRange::new(0, 0).modes(0.0, 0.0, c(1.0, 0.0), 1.0);
    assert!(synthesize_field(&amps(&[(4, [c(1.0, 0.0); 3])]), &modes, 0.0, 0.0).is_err());
}

#[test]
fn mode_range_examples() {
    // k_max = 0.1·2π/0.01 = 20π, spacing 2π: |0.5 + 2πn| < 20π admits n = −10
    assert_eq!(mode_range(0.01, 0.5, 1.0), ModeRange::new(-10, 9));
    assert_eq!(mode_range(0.01, 0.0, 1.0), ModeRange::new(-9, 9));
    assert_eq!(mode_range(0.1, 0.0, 1.0), ModeRange::new(0, 0));
    assert_eq!(mode_range(0.01, 0.0, 2.0).len(), 39);
}

#[test]
fn academic_setup_has_no_anomaly() {
    let s = academic().unwrap();
    let k0 = s.incident.k0();
    let r = ModeRange::new(-20, 20);
    for m in [Material::vacuum(), Material::dielectric(1.55), Material::dielectric(1.52)] {
        let km = m.wavenumber(s.incident.omega);
        assert!(detect_anomalous(s.incident.k[0], s.incident.k[2], km, 1.0, r, NEAR_ANOMALY_TOL).is_empty());
    }
    assert!(k0.re > 0.0);
}

proptest! {
    #[test]
    fn principal_branch(
        k1 in -10.0f64..10.0, k3 in -5.0f64..5.0, re in 0.1f64..10.0, im in 0.0f64..2.0,
        a in 0.2f64..5.0, n in -20i64..20,
    ) {
        let k0 = c(re, im);
        let k2 = transverse_wavenumber(n, k1, k3, k0, a);
        prop_assert!(k2.im >= 0.0);
        if k2.im == 0.0 {
            prop_assert!(k2.re >= 0.0);
        }
        let k1n = k1 + n as f64 * 2.0 * PI / a;
        let r = k0 * k0 - k1n * k1n - k3 * k3;
        prop_assert!((k2 * k2 - r).norm() <= 1e-12 * (k0.norm_sqr() + k1n * k1n + k3 * k3));
        let m = FourierMode::new(n, k1, k3, k0, a);
        prop_assert_eq!(m.class, classify_mode(k2, 1e-9 * k0.norm()));
        let k = m.wavevector(1.0);
        let div = m.complete(c(0.3, 0.1), c(-0.2, 0.4), 1.0);
        if m.class != ModeClass::Anomalous {
            let d = k[0] * div[0] + k[1] * div[1] + k[2] * div[2];
            prop_assert!(d.norm() < 1e-9 * (1.0 + k1n.abs() + k3.abs()));
        }
    }

    #[test]
    fn bessel_inequality(vals in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4..12), k1 in -3.0f64..3.0) {
        let n = vals.len();
        let a = 1.7;
        let seg: Vec<Vec3> = vals.iter().map(|&(r, i)| [c(r, i), c(i, 0.0), c(0.0, r)]).collect();
        let ph = C64::new(0.0, k1 * a).exp();
        let t = BoundaryTrace::sample(a, k1, n, |x| {
            let j = ((x / a) * n as f64).round() as usize;
            if j == n { seg[0].map(|z| z * ph) } else { seg[j] }
        });
        let e = fourier_coefficients(&t, ModeRange::new(-25, 25));
        prop_assert!(e.power() <= t.mean_square() * (1.0 + 1e-12));
        prop_assert!(e.power() >= 0.9 * t.mean_square());
    }

    #[test]
    fn bloch_translation(x1 in 0.0f64..1.0, x2 in 0.0f64..0.5, k1 in -2.0f64..2.0) {
        let a = 1.1;
        let modes = ModeRange::new(-2, 2).modes(k1, 0.2, c(4.0, 0.0), a);
        let src = amps(&[(-2, [c(0.3, 0.0); 3]), (0, [c(1.0, 0.2), c(0.0, 0.0), c(0.1, 0.0)]), (2, [c(0.0, 0.4); 3])]);
        let u = synthesize_field(&src, &modes, x1, x2).unwrap();
        let v = synthesize_field(&src, &modes, x1 + a, x2).unwrap();
        let f = C64::new(0.0, k1 * a).exp();
        prop_assert!(dist(v, u.map(|z| z * f)) < 1e-12);
    }
}
