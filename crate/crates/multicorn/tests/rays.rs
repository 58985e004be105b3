use std::f64::consts::TAU;

use multicorn::angles::{angle, Angle};
use multicorn::dynamics::MapParams;
use multicorn::atlas::{sample_direction, BoundaryConfig, ComponentRecord};
use multicorn::rays::{
    angle_deviation, dynamical_ray, external_angle_and_potential, external_angle_with_hint, landing_report,
    parameter_coordinate, parameter_ray, RayConfig, RayStatus,
};
use multicorn::Complex64;
use proptest::prelude::*;

const PERIOD3_CENTER: Complex64 = Complex64::new(-1.7548776662466927, 0.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn circle_dist(a: f64, b: f64) -> f64 {
    let x = (a - b).rem_euclid(1.0);
    x.min(1.0 - x)
}

#[test]
fn bottcher_of_zero_parameter() {
    let p = MapParams::new(2, c(0.0, 0.0)).unwrap();
    for (r, t) in [(2.0, 0.3), (1.5, 0.9), (10.0, 0.0)] {
        let (g, s) = external_angle_and_potential(&p, Complex64::from_polar(r, TAU * t)).unwrap();
        assert!((g - f64::ln(r)).abs() < 1e-12);
        assert!(circle_dist(s, t) < 1e-12);
    }
    assert!(external_angle_and_potential(&p, c(0.5, 0.0)).is_err());
}

fn arb_escaping() -> impl Strategy<Value = (Complex64, Complex64)> {
    (-1.0..0.3f64, -0.6..0.6f64, 0.3..1.0f64, 1.3..3.0f64)
        .prop_map(|(a, b, t, r)| (c(a, b), Complex64::from_polar(r, TAU * t)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bottcher_functional_equation((k, z) in arb_escaping(), d in 2u32..4) {
        let p = MapParams::new(d, k).unwrap();
        prop_assume!(z.norm() > 2.5);
        let (g0, t0) = external_angle_and_potential(&p, z).unwrap();
        let (g1, t1) = external_angle_and_potential(&p, p.step(z)).unwrap();
        prop_assert!((g1 - d as f64 * g0).abs() < 1e-10 * g1);
        prop_assert!(circle_dist(t1, -(d as f64) * t0) < 1e-9);
    }

    #[test]
    fn conjugation_negates_angle((k, z) in arb_escaping()) {
        let (g, t) = external_angle_and_potential(&MapParams::new(2, k).unwrap(), z).unwrap();
        let (h, s) = external_angle_and_potential(&MapParams::new(2, k.conj()).unwrap(), z.conj()).unwrap();
        prop_assert!((g - h).abs() < 1e-12);
        prop_assert!(circle_dist(s, -t) < 1e-9);
    }

    #[test]
    fn deviation_agrees_with_angle((k, z) in arb_escaping(), p in 0u64..9) {
        let params = MapParams::new(2, k).unwrap();
        let theta = angle(p, 9);
        let (_, t) = external_angle_with_hint(&params, z, Some(&theta), 10_000).unwrap();
        let (_, delta) = angle_deviation(&params, z, &theta, 10_000).unwrap();
        prop_assert!(circle_dist(theta.to_f64() + delta, t) < 1e-9);
    }
}

fn landing(params: &MapParams, a: &Angle) -> Complex64 {
    let rep = landing_report(params, a, &RayConfig::default()).unwrap();
    assert_eq!(rep.status, RayStatus::Landed, "{a} did not land");
    assert!(rep.matched_cycle.is_some());
    rep.landing_estimate.unwrap().point
}

#[test]
fn basilica_alpha_rays_coland() {
    let p = MapParams::new(2, c(-1.0, 0.0)).unwrap();
    let alpha = c((1.0 - 5f64.sqrt()) / 2.0, 0.0);
    let beta = c((1.0 + 5f64.sqrt()) / 2.0, 0.0);
    assert!((landing(&p, &angle(1, 3)) - alpha).norm() < 1e-6);
    assert!((landing(&p, &angle(2, 3)) - alpha).norm() < 1e-6);
    assert!((landing(&p, &Angle::zero()) - beta).norm() < 1e-6);
}

#[test]
fn period3_center_portrait_is_stable() {
    // Inside the component the ray pair landing at the characteristic
    // point persists.
    for k in [PERIOD3_CENTER, PERIOD3_CENTER + c(0.004, 0.003)] {
        let p = MapParams::new(2, k).unwrap();
        let a = landing(&p, &angle(3, 7));
        let b = landing(&p, &angle(4, 7));
        assert!((a - b).norm() < 1e-6, "c = {k}: {a} vs {b}");
        let e = landing(&p, &angle(2, 7));
        assert!((a - e).norm() > 1e-3);
    }
}

#[test]
fn dynamical_ray_potentials_decrease() {
    let p = MapParams::new(2, c(-0.2, 0.3)).unwrap();
    let ray = dynamical_ray(&p, &angle(1, 7), &RayConfig::default()).unwrap();
    assert!(ray.potentials.windows(2).all(|w| w[1] < w[0]));
    // Rounding of deep points is amplified by |∇G| ~ G / dist(z, J), so the
    // check stays at moderate potentials.
    for (z, g) in ray.points.iter().zip(&ray.potentials).filter(|(_, g)| **g > 1e-6).step_by(4) {
        let (h, _) = external_angle_and_potential(&p, *z).unwrap();
        assert!((h - g).abs() < 1e-8 * g, "{h} vs {g}");
    }
}

#[test]
fn zero_parameter_ray_tends_to_the_parabolic_root() {
    // Convergence is slow: the distance to 1/4 scales like (log G)^-2.
    let cfg = RayConfig {
        parameter_min_potential: 1e-40,
        ..RayConfig::default()
    };
    let ray = parameter_ray(2, &Angle::zero(), &cfg).unwrap();
    let end = ray.landing.unwrap().point;
    assert!((end - c(0.25, 0.0)).norm() < 1e-3, "{end}");
    assert!(ray.points.windows(2).all(|w| w[1].re < w[0].re));
    assert!(ray.points.iter().all(|z| z.im.abs() < 1e-9 && z.re > 0.25 - 1e-12));
    for (z, g) in ray.points.iter().zip(&ray.potentials).step_by(8) {
        let (h, t) = parameter_coordinate(2, *z).unwrap();
        assert!((h - g).abs() < 1e-8 * g);
        assert!(circle_dist(t, 0.0) < 1e-9);
    }
}

#[test]
fn rotated_parameter_ray() {
    let cfg = RayConfig::default();
    let zero = parameter_ray(2, &Angle::zero(), &cfg).unwrap();
    let third = parameter_ray(2, &angle(1, 3), &cfg).unwrap();
    let w = Complex64::from_polar(1.0, TAU / 3.0);
    let n = zero.points.len().min(third.points.len());
    assert!(n > 100);
    for i in (0..n).step_by(10) {
        assert!((zero.potentials[i] - third.potentials[i]).abs() < 1e-12 * zero.potentials[i]);
        assert!((w * zero.points[i] - third.points[i]).norm() < 1e-8 * zero.points[i].norm().max(1.0));
    }
}

#[test]
fn period3_ray_accumulates_on_the_component_boundary() {
    let comp = ComponentRecord::new(2, 3, PERIOD3_CENTER);
    let distances: Vec<f64> = [1e-20, 1e-40]
        .iter()
        .map(|&mp| {
            let cfg = RayConfig {
                parameter_min_potential: mp,
                ..RayConfig::default()
            };
            let ray = parameter_ray(2, &angle(3, 7), &cfg).unwrap();
            assert!(*ray.potentials.last().unwrap() <= mp * 1.0001);
            let end = *ray.points.last().unwrap();
            let bp = sample_direction(&comp, (end - PERIOD3_CENTER).arg(), &BoundaryConfig::default()).unwrap();
            (end - bp.c).norm()
        })
        .collect();
    assert!(distances[1] < distances[0], "{distances:?}");
    assert!(distances[1] < 5e-4, "{distances:?}");
}
