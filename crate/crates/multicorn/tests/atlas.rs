use std::f64::consts::{PI, TAU};

use multicorn::atlas::{
    attracting_cycle, boundary_trace, cusp_residual, find_centers, find_cusps, mu_family_demo, period1_boundary,
    period1_cusp_angles, sample_direction, scan_mu_circle, symmetry_orbit, to_lambda, AtlasError, BoundaryConfig,
    CenterConfig, ComponentRecord, CuspConfig,
};
use multicorn::dynamics::{MapParams, SolveConfig};
use multicorn::parabolic::attracting_critical_cycle;
use multicorn::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn contains(set: &[Complex64], z: Complex64, tol: f64) -> bool {
    set.iter().any(|w| (w - z).norm() < tol)
}

#[test]
fn center_examples() {
    let cfg = CenterConfig::default();
    assert_eq!(find_centers(2, 1, &cfg).centers, vec![c(0.0, 0.0)]);
    let two = find_centers(2, 2, &cfg);
    assert_eq!(two.centers.len(), 3);
    for z in [c(-1.0, 0.0), Complex64::from_polar(1.0, PI / 3.0), Complex64::from_polar(1.0, -PI / 3.0)] {
        assert!(contains(&two.centers, z, 1e-12), "{z}");
    }
    let three = find_centers(2, 3, &cfg);
    assert_eq!(three.centers.len(), 3);
    assert!(three.warning.is_none());
    // Real root of (c² + c)² + c = 0 besides 0, by Newton.
    let mut x: f64 = -1.75;
    for _ in 0..50 {
        let f = (x * x + x).powi(2) + x;
        let df = 2.0 * (x * x + x) * (2.0 * x + 1.0) + 1.0;
        x -= f / df;
    }
    assert!(contains(&three.centers, c(x, 0.0), 1e-12));
}

#[test]
fn centers_are_exact_period_and_rotation_closed() {
    let cfg = CenterConfig::default();
    for (d, k) in [(2u32, 3usize), (2, 4), (3, 2), (3, 3)] {
        let centers = find_centers(d, k, &cfg).centers;
        for &z in &centers {
            let params = MapParams::new(d, z).unwrap();
            let mut w = c(0.0, 0.0);
            for j in 1..=k {
                w = params.step(w);
                if j < k {
                    assert!(w.norm() > 1e-8, "d={d} k={k} closes early at {j}");
                }
            }
            assert!(w.norm() < 1e-9);
            for r in symmetry_orbit(z, d) {
                assert!(contains(&centers, r, 1e-8), "d={d} k={k}: {r} missing");
            }
        }
    }
}

#[test]
fn symmetry_and_lambda_examples() {
    assert_eq!(to_lambda(c(1.0, 0.0), 2).unwrap(), c(2.0, 0.0));
    assert!(matches!(to_lambda(c(0.0, 0.0), 2), Err(AtlasError::ZeroParameter)));
    let orbit = symmetry_orbit(c(-1.0, 0.0), 2);
    assert_eq!(orbit.len(), 3);
    for z in [c(-1.0, 0.0), Complex64::from_polar(1.0, PI / 3.0), Complex64::from_polar(1.0, -PI / 3.0)] {
        assert!(contains(&orbit, z, 1e-15));
    }
}

#[test]
fn period1_boundary_examples() {
    assert!((period1_boundary(2, 0.0) - c(0.25, 0.0)).norm() < 1e-15);
    assert!((period1_boundary(2, PI) - c(-0.75, 0.0)).norm() < 1e-15);
    assert!((period1_boundary(2, PI / 3.0) - Complex64::from_polar(0.75, PI / 3.0)).norm() < 1e-15);
}

#[test]
fn period1_trace_matches_deltoid() {
    let comp = ComponentRecord::new(2, 1, c(0.0, 0.0));
    let trace = boundary_trace(&comp, 360, &BoundaryConfig::default());
    assert!(trace.points.len() >= 355, "{} points", trace.points.len());
    for p in &trace.points {
        assert!((p.c - period1_boundary(2, p.z.arg())).norm() < 1e-6);
        assert!((p.multiplier.norm() - 1.0).abs() <= 1e-6);
    }
}

/// Real parameters where the real period-3 cycle of x ↦ x² + c has
/// multiplier `s`, by Newton in (x, c).
fn real_window_end(s: f64, x0: f64, c0: f64) -> f64 {
    let residual = |x: f64, k: f64| {
        let x1 = x * x + k;
        let x2 = x1 * x1 + k;
        let x3 = x2 * x2 + k;
        [x3 - x, 8.0 * x * x1 * x2 - s]
    };
    let (mut x, mut k) = (x0, c0);
    for _ in 0..100 {
        let r = residual(x, k);
        let h = 1e-7;
        let rx = residual(x + h, k);
        let rk = residual(x, k + h);
        let j = [[(rx[0] - r[0]) / h, (rk[0] - r[0]) / h], [(rx[1] - r[1]) / h, (rk[1] - r[1]) / h]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        x -= (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        k -= (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
    }
    k
}

#[test]
fn period3_real_samples_bracket_the_real_window() {
    let right = real_window_end(1.0, 0.0, -1.75);
    let left = real_window_end(-1.0, 0.0, -1.768);
    assert!((right + 1.75).abs() < 1e-9);
    let comp = ComponentRecord::new(2, 3, c(-1.7548776662466927, 0.0));
    let cfg = BoundaryConfig::default();
    let east = sample_direction(&comp, 0.0, &cfg).unwrap();
    let west = sample_direction(&comp, PI, &cfg).unwrap();
    assert!((east.c - c(right, 0.0)).norm() < 1e-7, "{} vs {right}", east.c);
    assert!((west.c - c(left, 0.0)).norm() < 1e-7, "{} vs {left}", west.c);
}

#[test]
fn cusp_residual_at_minus_three_quarters() {
    let r = cusp_residual(2, 1, c(-0.75, 0.0), c(-0.5, 0.0));
    for v in r {
        assert!(v.norm() < 1e-14);
    }
}

#[test]
fn period1_cusps_match_closed_form() {
    let found = find_cusps(2, 1, &CuspConfig::default()).unwrap();
    assert_eq!(found.cusps.len(), 3);
    assert!(found.warning.is_none());
    for t in period1_cusp_angles(2) {
        assert!(found.cusps.iter().any(|q| (q.c - period1_boundary(2, t)).norm() < 1e-8));
    }
}

#[test]
fn period3_cusps_are_interior_and_bifurcate() {
    let found = find_cusps(2, 3, &CuspConfig::default()).unwrap();
    assert_eq!(found.cusps.len(), 9);
    assert_eq!(found.expected, 9);
    for q in &found.cusps {
        // No escaping parameter on a small circle around the cusp.
        for j in 0..64 {
            let w = q.c + Complex64::from_polar(1e-4, TAU * j as f64 / 64.0);
            let params = MapParams::new(2, w).unwrap();
            let mut z = c(0.0, 0.0);
            for _ in 0..20_000 {
                z = params.step(z);
            }
            assert!(z.norm() < 2.0, "escape near cusp {}", q.c);
        }
        // Parameters with an attracting cycle of twice the period nearby.
        let hit = (1..=12).any(|i| {
            (0..48).any(|j| {
                let w = q.c + Complex64::from_polar(1e-3 * i as f64 / 12.0, TAU * j as f64 / 48.0);
                attracting_critical_cycle(2, w, 6)
            })
        });
        assert!(hit, "no period-6 parameters near {}", q.c);
    }
}

#[test]
fn mu_family_examples() {
    let (pick, fractions) = scan_mu_circle(32, 1e-2, 21);
    let mu0 = pick.expect("a fully non-repelling circle point");
    assert!((mu0.norm() - 1.0).abs() < 1e-12);
    assert_eq!(fractions.len(), 32);
    assert_eq!(mu_family_demo(mu0, 1e-2, 21), 1.0);
    assert_eq!(mu_family_demo(c(0.5, 0.0), 1e-2, 21), 1.0);
    assert_eq!(mu_family_demo(c(5.0, 0.0), 1e-2, 21), 0.0);
}

proptest! {
    #[test]
    fn lambda_is_rotation_invariant(re in -2.0..2.0f64, im in -2.0..2.0f64, d in 2u32..5) {
        let z = c(re, im);
        prop_assume!(z.norm() > 1e-3);
        let l = to_lambda(z, d).unwrap();
        for r in symmetry_orbit(z, d) {
            prop_assert!((to_lambda(r, d).unwrap() - l).norm() < 1e-10 * l.norm().max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn outside_boundary_samples_nothing_attracts(phi in 0.0..TAU) {
        let comp = ComponentRecord::new(2, 1, c(0.0, 0.0));
        let cfg = BoundaryConfig::default();
        if let Ok(p) = sample_direction(&comp, phi, &cfg) {
            // Step past the polished |ρ| tolerance, not just the bisection bracket.
            let outward = p.c + Complex64::from_polar(1e-6, phi);
            prop_assert!(attracting_cycle(2, outward, 1, &SolveConfig::default()).is_none());
        }
    }

    #[test]
    fn period3_boundary_samples_are_indifferent(phi in 0.0..TAU) {
        let comp = ComponentRecord::new(2, 3, c(-1.7548776662466927, 0.0));
        let cfg = BoundaryConfig::default();
        if let Ok(p) = sample_direction(&comp, phi, &cfg) {
            prop_assert!((p.multiplier.norm() - 1.0).abs() <= 1e-6);
            // Step past the polished |ρ| tolerance, not just the bisection bracket.
            let outward = p.c + Complex64::from_polar(1e-6, phi);
            prop_assert!(attracting_cycle(2, outward, 3, &SolveConfig::default()).is_none());
        }
    }
}
