use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robin_core::geometry::{pt, EdgeBc, Point, Polygon};
use robin_core::kernels::WaveParams;
use robin_core::scattering::*;
use std::f64::consts::PI;

fn centered_square() -> Polygon {
    Polygon::rectangle(-0.5, -0.5, 0.5, 0.5).unwrap()
}

fn wave(k: f64, lambda: f64, d: Point) -> WaveParams {
    WaveParams::new(k, lambda.into(), d).unwrap()
}

#[test]
fn polygon_disk_matches_series() {
    let w = wave(1.0, 1.0, pt(1.0, 0.0));
    let mie = mie_disk_oracle(1.0, &w, 128, 40).unwrap();
    let poly = Polygon::regular(64, pt(0.0, 0.0), 1.0, 0.0).unwrap();
    let sol = assemble_solve(&poly, &w, &MeshParams::with_panels(512)).unwrap();
    let err = sol.far_field(128).unwrap().relative_error(&mie).unwrap();
    assert!(err < 0.02, "relative far-field error {err}");
    assert!(sol.residual < 1e-12);
    assert!(sol.warnings.is_empty());
}

#[test]
fn mesh_refinement_converges() {
    // Against a fine reference of the same polygon the scheme gains at least
    // a factor 1.7 per doubling.
    let w = wave(1.0, 1.0, pt(0.6, 0.8));
    let poly = centered_square();
    let ff = |n| assemble_solve(&poly, &w, &MeshParams::with_panels(n)).unwrap().far_field(64).unwrap();
    let reference = ff(1024);
    let e1 = ff(64).relative_error(&reference).unwrap();
    let e2 = ff(128).relative_error(&reference).unwrap();
    assert!(e1 / e2 >= 1.7, "{e1} {e2}");
}

#[test]
fn neumann_limit_is_sound_hard() {
    let w = wave(1.0, 0.0, pt(1.0, 0.0));
    let poly = Polygon::regular(64, pt(0.0, 0.0), 1.0, 0.0).unwrap();
    let sol = assemble_solve(&poly, &w, &MeshParams::with_panels(256)).unwrap();
    assert!(sol.flux.iter().all(|q| q.norm() == 0.0));
    let hard = mie_disk_oracle(1.0, &w, 64, 40).unwrap();
    assert!(sol.far_field(64).unwrap().relative_error(&hard).unwrap() < 0.01);
    assert!(sol.boundary_residual() < 1e-3);
}

#[test]
fn large_impedance_approaches_dirichlet() {
    let sq = centered_square();
    let w = wave(1.0, 1e4, pt(0.6, 0.8));
    let params = MeshParams::with_panels(256);
    let robin = assemble_solve(&sq, &w, &params).unwrap();
    let soft = assemble_solve(&sq.with_uniform_bc(EdgeBc::Dirichlet), &w, &params).unwrap();
    let ff = robin.far_field(64).unwrap().relative_error(&soft.far_field(64).unwrap()).unwrap();
    assert!(ff < 0.05, "far field {ff}");
    // The flux agrees away from the corners, where the Robin and Dirichlet
    // corner singularities differ on a length scale 1/λ.
    let keep = |p: &Panel| sq.vertices().iter().all(|v| (p.midpoint - v).norm() > 0.02);
    let (mut num, mut den) = (0.0, 0.0);
    for (p, (a, b)) in robin.mesh.panels.iter().zip(robin.flux.iter().zip(&soft.flux)) {
        if keep(p) {
            num += p.length * (a - b).norm_sqr();
            den += p.length * b.norm_sqr();
        }
    }
    assert!((num / den).sqrt() < 0.05);
    assert!(robin.trace.iter().all(|u| u.norm() < 0.05));
}

#[test]
fn boundary_residual_is_small() {
    let w = wave(1.0, 1.0, pt(0.6, 0.8));
    let sol = assemble_solve(&centered_square(), &w, &MeshParams::with_panels(512)).unwrap();
    assert!(sol.boundary_residual() < 1e-2);
}

#[test]
fn far_field_matches_scaled_field() {
    let w = wave(1.0, 1.0, pt(0.6, 0.8));
    let sol = assemble_solve(&centered_square(), &w, &MeshParams::with_panels(256)).unwrap();
    for xhat in [pt(1.0, 0.0), pt(0.28, -0.96), pt(-0.6, 0.8)] {
        let uinf = sol.far_field_at(&xhat);
        let err: Vec<f64> = [200.0, 400.0, 800.0]
            .iter()
            .map(|&r| {
                let usc = sol.scattered_field(&(xhat * r)).unwrap();
                (usc * r.sqrt() * Complex64::new(0.0, -r).exp() - uinf).norm()
            })
            .collect();
        for pair in err.windows(2) {
            assert!((pair[0] / pair[1]).log2() >= 0.9, "{err:?}");
        }
    }
}

#[test]
fn far_decay_and_radiation_condition() {
    let w = wave(1.0, 1.0, pt(1.0, 0.0));
    let sol = assemble_solve(&centered_square(), &w, &MeshParams::with_panels(256)).unwrap();
    let xhat = pt(0.6, -0.8);
    let r = 1000.0;
    let usc = sol.scattered_field(&(xhat * r)).unwrap();
    assert!((usc.norm() - sol.far_field_at(&xhat).norm() / r.sqrt()).abs() < 0.05 * usc.norm());
    let a = sol.scattered_field(&(xhat * 100.0)).unwrap().norm();
    let exponent = (usc.norm() / a).ln() / 10f64.ln();
    assert!((exponent + 0.5).abs() < 0.025, "decay exponent {exponent}");
    let mut prev = f64::INFINITY;
    for r in [100.0, 300.0, 1000.0] {
        let (v, g) = sol.scattered_with_gradient(&(xhat * r)).unwrap();
        let dr = g[0] * xhat.x + g[1] * xhat.y;
        let s = ((dr - Complex64::new(0.0, 1.0) * v) * r.sqrt()).norm();
        assert!(s < prev);
        prev = s;
    }
    assert!(prev < 1e-3);
}

#[test]
fn reciprocity() {
    let sq = Polygon::new(vec![pt(0.0, 0.0), pt(1.2, 0.1), pt(0.9, 0.8), pt(0.2, 1.1)]).unwrap();
    let params = MeshParams::with_panels(256);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..3 {
        let (a, b): (f64, f64) = (rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
        let d = pt(a.cos(), a.sin());
        let xhat = pt(b.cos(), b.sin());
        let s1 = assemble_solve(&sq, &wave(1.5, 1.0, d), &params).unwrap();
        let s2 = assemble_solve(&sq, &wave(1.5, 1.0, -xhat), &params).unwrap();
        let diff = (s1.far_field_at(&xhat) - s2.far_field_at(&-d)).norm();
        // Ten times the discretization error, itself below 1e-4 here.
        assert!(diff < 1e-3, "{diff}");
    }
}

#[test]
fn rotation_shifts_far_field() {
    let m = 64;
    let shift = 5;
    let alpha = 2.0 * PI * shift as f64 / m as f64;
    let rot = |p: &Point| pt(alpha.cos() * p.x - alpha.sin() * p.y, alpha.sin() * p.x + alpha.cos() * p.y);
    let poly = Polygon::new(vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 0.8), pt(0.3, 1.0)]).unwrap();
    let d = pt(0.6, 0.8);
    let params = MeshParams::with_panels(128);
    let f1 = assemble_solve(&poly, &wave(1.0, 1.0, d), &params).unwrap().far_field(m).unwrap();
    let rotated = poly.map_points(rot).unwrap();
    let f2 = assemble_solve(&rotated, &wave(1.0, 1.0, rot(&d)), &params).unwrap().far_field(m).unwrap();
    for i in 0..m {
        assert!((f1.values[i] - f2.values[(i + shift) % m]).norm() < 1e-8);
    }
}

#[test]
fn field_evaluation_rejects_interior_and_flags_near_boundary() {
    let sol = assemble_solve(&centered_square(), &wave(1.0, 1.0, pt(1.0, 0.0)), &MeshParams::with_panels(64)).unwrap();
    assert!(sol.evaluate_field(&pt(0.0, 0.0)).is_err());
    assert!(sol.near_boundary(&pt(0.5 + 1e-4, 0.0)));
    assert!(!sol.near_boundary(&pt(3.0, 0.0)));
}

#[test]
fn complex_impedance_needs_diagnostics_mode() {
    let w = WaveParams::new(1.0, Complex64::new(1.0, 0.5), pt(1.0, 0.0)).unwrap();
    let sq = centered_square();
    assert!(assemble_solve(&sq, &w, &MeshParams::with_panels(64)).is_err());
    let params = MeshParams {
        diagnostics: true,
        ..MeshParams::with_panels(64)
    };
    assert!(assemble_solve(&sq, &w, &params).is_ok());
}

#[test]
fn far_field_needs_enough_samples() {
    let sol = assemble_solve(&centered_square(), &wave(1.0, 1.0, pt(1.0, 0.0)), &MeshParams::with_panels(64)).unwrap();
    assert!(sol.far_field(32).is_err());
    let ff = sol.far_field(64).unwrap();
    assert_eq!(ff.len(), 64);
}

fn chamfered_square() -> Polygon {
    Polygon::new(vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 0.8), pt(0.8, 1.0), pt(0.0, 1.0)]).unwrap()
}

#[test]
fn uniqueness_experiment_verdicts() {
    let unit = Polygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
    let w = wave(2.0, 1.0, pt(1.0, 0.0));
    let opts = ExperimentOptions::default();
    // Same square listed from a different starting vertex.
    let shifted = Polygon::new(vec![pt(1.0, 1.0), pt(0.0, 1.0), pt(0.0, 0.0), pt(1.0, 0.0)]).unwrap();
    let same = uniqueness_experiment(&unit, &shifted, &w, 128, &opts).unwrap();
    assert!(same.identical);
    assert_eq!(same.verdict, Verdict::Pass);
    assert!(same.farfield_gap <= 3.0 * same.mesh_error_estimate);

    let chamfer = uniqueness_experiment(&unit, &chamfered_square(), &w, 128, &opts).unwrap();
    assert_eq!(chamfer.verdict, Verdict::Pass);
    assert!(chamfer.farfield_gap >= 10.0 * chamfer.mesh_error_estimate);
    // Regression fixture for the far-field gap.
    assert!((chamfer.farfield_gap - 0.0571).abs() < 1e-3, "{}", chamfer.farfield_gap);

    let other_lambda = unit.with_uniform_bc(EdgeBc::Robin { lambda: 2.0.into() });
    let imp = uniqueness_experiment(&unit, &other_lambda, &w, 128, &opts).unwrap();
    assert!(!imp.identical);
    assert_eq!(imp.verdict, Verdict::Pass);
    assert!(imp.farfield_gap >= 10.0 * imp.mesh_error_estimate);

    // A chamfer far below the resolution cannot be told apart.
    let tiny = Polygon::new(vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0 - 1e-6), pt(1.0 - 1e-6, 1.0), pt(0.0, 1.0)]).unwrap();
    let unresolved = uniqueness_experiment(&unit, &tiny, &w, 128, &opts).unwrap();
    assert_eq!(unresolved.verdict, Verdict::Inconclusive);
}
