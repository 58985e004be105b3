use multicorn::atlas::{period1_boundary, period1_cusp_angles, sample_direction, BoundaryConfig, ComponentRecord};
use multicorn::dynamics::{MapParams, ReturnMap};
use multicorn::parabolic::{
    bifurcation_test, contour_index, critical_ecalle_height, even_bifurcation_check, fatou_coordinate,
    fatou_coordinate_of, fixed_point_index, normal_form, normal_form_of, return_map_index, trace_arc, ArcConfig,
    BifurcationConfig, EvenBifurcationConfig, FatouConfig, ParabolicError,
};
use multicorn::series::{HolomorphicMap, Linear, ParabolicModel, Polynomial};
use multicorn::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn normal_form_examples() {
    let quarter = normal_form(2, c(0.25, 0.0), 1, c(0.5, 0.0)).unwrap();
    assert_eq!(quarter.petals, 1);
    assert!((quarter.normal_form_b - 2.0).norm() < 1e-12);
    assert!((quarter.formal_invariant - 0.5).norm() < 1e-12);

    // (z² − 3/4)² − 3/4 has a triple fixed point at −1/2.
    let root = normal_form(2, c(-0.75, 0.0), 1, c(-0.5, 0.0)).unwrap();
    assert_eq!(root.petals, 2);
    assert!((root.z0 - c(-0.5, 0.0)).norm() < 1e-10);

    assert!(matches!(
        normal_form(2, c(0.0, 0.0), 1, c(0.0, 0.0)),
        Err(ParabolicError::NotParabolic { .. })
    ));
}

#[test]
fn model_map_normal_form() {
    let nf = normal_form_of(&ParabolicModel, c(0.0, 0.0)).unwrap();
    assert_eq!(nf.petals, 1);
    assert!((nf.b - 1.0).norm() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn model_fatou_coordinate_is_minus_reciprocal(re in -0.3..-0.02f64, im in -0.1..0.1f64) {
        let w = c(re, im);
        let nf = normal_form_of(&ParabolicModel, c(0.0, 0.0)).unwrap();
        let psi = fatou_coordinate_of(&ParabolicModel, &nf, w, &FatouConfig::default()).unwrap();
        prop_assert!((psi + w.inv()).norm() < 1e-7 * w.inv().norm(), "{} vs {}", psi, -w.inv());
    }

    #[test]
    fn fatou_coordinate_conjugates_to_translation(t in 0.05..0.45f64, im in -0.05..0.05f64) {
        let rec = normal_form(2, c(0.25, 0.0), 1, c(0.5, 0.0)).unwrap();
        let map = rec.return_map();
        let z = c(t, im);
        let cfg = FatouConfig::default();
        let a = fatou_coordinate(&rec, z, &cfg).unwrap();
        let b = fatou_coordinate(&rec, map.eval(z), &cfg).unwrap();
        prop_assert!((b - a - 1.0).norm() < 1e-6, "defect {}", (b - a - 1.0).norm());
    }

    #[test]
    fn index_of_simple_fixed_points(
        a in (-1.0..1.0f64, -1.0..1.0f64),
        b in (-1.0..1.0f64, -1.0..1.0f64),
        s in (0.2..2.0f64, -2.0..2.0f64),
    ) {
        // P(z) = z + s (z − a)(z − b) fixes a and b with multipliers 1 ± s (a − b).
        let (a, b, s) = (c(a.0, a.1), c(b.0, b.1), c(s.0, s.1));
        prop_assume!((a - b).norm() > 0.2);
        let p = Polynomial { coeffs: vec![s * a * b, 1.0 - s * (a + b), s] };
        let r = 0.4 * (a - b).norm();
        for (z, rho) in [(a, 1.0 + s * (a - b)), (b, 1.0 + s * (b - a))] {
            let est = fixed_point_index(&p, z, r, 256).unwrap();
            prop_assert!((est.index - 1.0 / (1.0 - rho)).norm() < 1e-9);
        }
        // Both fixed points inside one contour: indices add, and the finite
        // indices of a polynomial sum to zero.
        let big = contour_index(&p, 0.5 * (a + b), 2.0 * (a - b).norm(), 1024).unwrap();
        prop_assert_eq!(big.winding, 2);
        prop_assert!(big.index.norm() < 1e-9);
    }
}

#[test]
fn linear_and_quarter_indices() {
    for l in [c(2.0, 0.0), c(0.5, 0.5), c(-1.0, 0.0)] {
        let est = fixed_point_index(&Linear(l), c(0.0, 0.0), 1.0, 128).unwrap();
        assert!((est.index - 1.0 / (1.0 - l)).norm() < 1e-12);
    }
    let est = return_map_index(&MapParams::new(2, c(0.25, 0.0)).unwrap(), 1, c(0.5, 0.0)).unwrap();
    assert_eq!(est.winding, 2);
    assert!((est.index - 0.5).norm() < 1e-6);
}

#[test]
fn index_matches_formal_invariant_along_an_arc() {
    let comp = ComponentRecord::new(2, 1, c(0.0, 0.0));
    for phi in [0.4, 1.0, -0.7] {
        let bp = sample_direction(&comp, phi, &BoundaryConfig::default()).unwrap();
        let rec = normal_form(2, bp.c, 1, bp.z).unwrap();
        let est = return_map_index(&MapParams::new(2, bp.c).unwrap(), 1, rec.z0).unwrap();
        assert!((est.index - rec.formal_invariant).norm() < 1e-5, "{} vs {}", est.index, rec.formal_invariant);
        assert!(est.index.im.abs() < 1e-6);
    }
}

#[test]
fn ecalle_height_properties() {
    let cfg = FatouConfig::default();
    assert!(critical_ecalle_height(2, c(0.25, 0.0), 1, &cfg).unwrap().abs() < 1e-6);
    let comp = ComponentRecord::new(2, 1, c(0.0, 0.0));
    let bcfg = BoundaryConfig::default();
    let heights: Vec<f64> = [0.1, 0.3, 0.6]
        .iter()
        .map(|&phi| {
            let up = sample_direction(&comp, phi, &bcfg).unwrap().c;
            let down = sample_direction(&comp, -phi, &bcfg).unwrap().c;
            assert!((up - down.conj()).norm() < 1e-9);
            let h = critical_ecalle_height(2, up, 1, &cfg).unwrap();
            let g = critical_ecalle_height(2, down, 1, &cfg).unwrap();
            assert!((h + g).abs() < 1e-6, "h = {h}, conjugate gives {g}");
            h
        })
        .collect();
    assert!(heights.windows(2).all(|w| (w[1] - w[0]) * (heights[2] - heights[0]) > 0.0), "{heights:?}");
}

#[test]
fn bifurcation_follows_the_index() {
    let mut comp = ComponentRecord::new(2, 1, c(0.0, 0.0));
    comp.cusps = period1_cusp_angles(2).into_iter().map(|t| period1_boundary(2, t)).collect();
    let trace = trace_arc(&comp, 0, 12, &ArcConfig::default()).unwrap();
    assert!(trace.samples.len() >= 8);
    let bcfg = BifurcationConfig::default();
    let (mut above, mut below) = (0, 0);
    for s in &trace.samples {
        let evidence = bifurcation_test(s, 2, 1, &bcfg);
        if s.index.re > 1.1 {
            above += 1;
            assert!(evidence.is_some(), "no bifurcation at {} (index {})", s.c, s.index);
        } else if s.index.re < 0.9 {
            below += 1;
            assert!(evidence.is_none(), "bifurcation at {} (index {})", s.c, s.index);
        }
    }
    assert!(above > 0 && below > 0, "above {above}, below {below}");
}

#[test]
fn even_period_bifurcation() {
    let cfg = EvenBifurcationConfig::default();
    let report = even_bifurcation_check(&cfg).unwrap();
    let rho = report.multiplier;
    assert!((rho - Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0)).norm() < 1e-9);
    assert_eq!(report.cycle.len(), 2);
    let params = MapParams::new(2, report.c0).unwrap();
    assert!((ReturnMap::new(params, 1).eval(report.cycle[0]) - report.cycle[0]).norm() < 1e-9);
    assert!(!report.attracting_parameters.is_empty());
    let rel = (report.fitted_slope.norm() - report.expected_slope) / report.expected_slope;
    assert!(rel.abs() < 0.1, "slope {} vs {}", report.fitted_slope, report.expected_slope);
}
