//! Property tests of the geometric, kernel and extension invariants.

use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::TAU;
use robin_core::field::ExpSum;
use robin_core::geometry::{pt, winding_number, Frame, Line, PathCurve, Polygon};
use robin_core::harmonic_reflection::{dtilde_apply, robin_harmonic_exponential, RobinLineBC};
use robin_core::helmholtz_extension::{dk_apply, AreaMode, ExtensionRegion};
use robin_core::kernels::{g0_robin_halfplane, phi_helmholtz, WaveParams};
use robin_core::path_planner::{classify_gap, plan_reflections, GapCase, Termination};
use robin_core::verify::notch_fixture;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn line_reflection_is_an_isometric_involution(
        ax in -5.0..5.0f64, ay in -5.0..5.0f64, th in 0.0..TAU,
        px in -5.0..5.0f64, py in -5.0..5.0f64, qx in -5.0..5.0f64, qy in -5.0..5.0f64,
    ) {
        let l = Line::new(pt(ax, ay), pt(th.cos(), th.sin())).unwrap();
        let (p, q) = (pt(px, py), pt(qx, qy));
        prop_assert!((l.reflect(&l.reflect(&p)) - p).norm() < 1e-12);
        prop_assert!(((l.reflect(&p) - l.reflect(&q)).norm() - (p - q).norm()).abs() < 1e-12);
        prop_assert!((l.signed_distance(&l.reflect(&p)) + l.signed_distance(&p)).abs() < 1e-12);
    }

    #[test]
    fn polygon_reflection_preserves_area_and_orientation(
        th in 0.0..TAU, c in -3.0..3.0f64, n in 3usize..9, r in 0.5..2.0f64,
    ) {
        let poly = Polygon::regular(n, pt(0.3, -0.2), r, 0.4).unwrap();
        let l = Line::new(pt(c, 0.0), pt(th.cos(), th.sin())).unwrap();
        let refl = poly.reflect(&l);
        prop_assert!((refl.area() - poly.area()).abs() < 1e-12 * poly.area());
        prop_assert!(refl.area() > 0.0);
        let mut closed = refl.vertices().to_vec();
        closed.push(closed[0]);
        prop_assert_eq!(winding_number(&closed, &l.reflect(&poly.centroid())), 1);
    }

    #[test]
    fn frame_round_trip(ax in -3.0..3.0f64, th in 0.0..TAU, px in -3.0..3.0f64, py in -3.0..3.0f64) {
        let l = Line::new(pt(ax, 1.0), pt(th.cos(), th.sin())).unwrap();
        let known = pt(ax, 1.0) + pt(-th.sin(), th.cos());
        let f = Frame::for_line(&l, &known).unwrap();
        let p = pt(px, py);
        prop_assert!((f.to_world(&f.to_local(&p)) - p).norm() < 1e-12);
        // The known side maps to the upper half-plane, the line to x₂ = 0.
        prop_assert!(f.to_local(&known).y > 0.0);
        prop_assert!(f.to_local(&l.point_at(px)).y.abs() < 1e-12);
    }

    #[test]
    fn robin_green_function_is_symmetric(
        x1 in -3.0..3.0f64, x2 in 0.05..3.0f64, y1 in -3.0..3.0f64, y2 in 0.05..3.0f64, lam in 0.1..3.0f64,
    ) {
        prop_assume!((x1 - y1).hypot(x2 - y2) > 1e-3);
        let (x, y) = (pt(x1, x2), pt(y1, y2));
        let a = g0_robin_halfplane(&x, &y, lam.into()).unwrap().value;
        let b = g0_robin_halfplane(&y, &x, lam.into()).unwrap().value;
        prop_assert!((a - b).norm() <= 1e-8 * a.norm().max(1.0));
    }

    #[test]
    fn helmholtz_fundamental_solution_depends_on_distance_only(
        r in 0.05..20.0f64, a in 0.0..TAU, b in 0.0..TAU, k in 0.2..5.0f64,
    ) {
        let o = pt(0.0, 0.0);
        let u = phi_helmholtz(&pt(r * a.cos(), r * a.sin()), &o, k).unwrap().value;
        let v = phi_helmholtz(&pt(1.0 + r * b.cos(), r * b.sin()), &pt(1.0, 0.0), k).unwrap().value;
        prop_assert!((u - v).norm() <= 1e-12 * u.norm().max(1.0));
    }

    #[test]
    fn reflection_is_exact_on_robin_exponentials(
        lam in 0.0..2.0f64, mu in -1.5..1.5f64, x1 in -1.0..1.0f64, x2 in 0.05..1.5f64, off in -0.8..0.8f64,
    ) {
        let w = robin_harmonic_exponential(lam.into(), mu.into());
        let bc = RobinLineBC::canonical(lam.into());
        let x = pt(x1, x2);
        let path = PathCurve::new(vec![pt(x1 + off, 0.0), pt(x1 + off, 0.5 * x2), x]).unwrap();
        let v = dtilde_apply(&w, &path, &bc, &x).unwrap();
        let expected = w.value(&pt(x1, -x2));
        prop_assert!((v - expected).norm() <= 1e-9 * expected.norm().max(1.0));
    }

    #[test]
    fn helmholtz_extension_reproduces_robin_plane_waves(
        d2 in -0.9..-0.1f64, x1 in -0.8..0.8f64, x2 in 0.1..1.2f64, off in -0.4..0.4f64,
    ) {
        // λ = −k d₂ makes e^{ikx·d} satisfy the Robin condition on x₂ = 0.
        let k = 1.0;
        let d = pt((1.0 - d2 * d2).sqrt(), d2);
        let wave = WaveParams::new(k, (-k * d2).into(), d).unwrap();
        let u = ExpSum::plane_wave(k, d);
        let mut region = ExtensionRegion::new(Polygon::rectangle(-1.5, 0.0, 2.0, 1.6).unwrap()).unwrap();
        region.quad.mode = AreaMode::Residue;
        let x = pt(x1, x2);
        let path = PathCurve::new(vec![pt(x1 + off, 0.0), pt(x1 + off, 0.5 * x2), x]).unwrap();
        let v = dk_apply(&u, &region, &path, &wave, &x).unwrap();
        prop_assert!((v - u.mirrored().value(&x)).norm() < 1e-8);
    }

    #[test]
    fn planner_is_invariant_under_translation(tx in -10.0..10.0f64, ty in -10.0..10.0f64) {
        let (d1, d2) = notch_fixture();
        let shift = pt(tx, ty);
        let m = |p: &robin_core::Point| p + shift;
        let config = classify_gap(&d1.map_points(m).unwrap(), &d2.map_points(m).unwrap()).unwrap();
        let GapCase::Segment { segment, .. } = &config.case else {
            return Err(TestCaseError::fail(format!("{:?}", config.case)));
        };
        prop_assert!((segment.midpoint() - pt(2.0 + tx, 4.0 + ty)).norm() < 1e-9);
        let gamma = robin_core::geometry::EscapePath::new(
            vec![pt(2.0 + tx, 4.0 + ty), pt(2.2 + tx, 4.5 + ty)],
            pt(0.0, 1.0),
        )
        .unwrap();
        let plan = plan_reflections(&config, &gamma, 8).unwrap();
        let is_full_line = matches!(plan.termination, Termination::FullLine { step: 1, .. });
        prop_assert!(is_full_line);
    }
}

#[test]
fn exponential_family_satisfies_the_robin_condition() {
    // ∂₂w + iλw = 0 on x₂ = 0, checked through the exponents.
    let (lam, mu) = (0.7, 1.3);
    let w = robin_harmonic_exponential(lam.into(), mu.into());
    let i = Complex64::new(0.0, 1.0);
    for x1 in [-1.0, 0.0, 0.8] {
        let p = pt(x1, 0.0);
        let (mut v, mut d2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (c, e) in w.terms() {
            let t = c * (e[0] * p.x + e[1] * p.y).exp();
            v += t;
            d2 += e[1] * t;
        }
        assert!((d2 + i * lam * v).norm() < 1e-12);
    }
}
