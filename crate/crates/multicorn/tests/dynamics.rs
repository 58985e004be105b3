use multicorn::dynamics::{
    classify_multiplier, cycle_multiplier, evaluate, find_cycles, Iterate, MapParams, SolveConfig, Stability,
};
use multicorn::Complex64;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn p(d: u32, c: Complex64) -> MapParams {
    MapParams::new(d, c).unwrap()
}

#[test]
fn evaluate_examples() {
    assert_eq!(evaluate(&p(2, c(0.0, 0.0)), c(0.0, 1.0), 1).point().unwrap(), c(-1.0, 0.0));
    let k = c(0.3, -0.7);
    assert_eq!(evaluate(&p(2, k), c(0.0, 0.0), 1).point().unwrap(), k);
    assert_eq!(evaluate(&p(2, c(-1.0, 0.0)), c(0.0, 0.0), 2).point().unwrap(), c(0.0, 0.0));
    assert_eq!(evaluate(&p(3, k), k, 0), Iterate::Point(k));
    assert!(matches!(evaluate(&p(2, c(1.0, 0.0)), c(0.0, 0.0), 100), Iterate::Escaped { .. }));
}

#[test]
fn second_iterate_examples() {
    let s = p(2, c(0.0, 1.0)).second_iterate();
    assert_eq!((s.a, s.b, s.degree), (c(0.0, -1.0), c(0.0, 1.0), 2));
    let s = p(3, c(0.5, 0.0)).second_iterate();
    assert_eq!((s.a, s.b), (c(0.5, 0.0), c(0.5, 0.0)));
}

#[test]
fn multiplier_examples() {
    let (_, rho) = cycle_multiplier(&p(2, c(-1.0, 0.0)), &[c(0.0, 0.0), c(-1.0, 0.0)]).unwrap();
    assert_eq!(rho, c(0.0, 0.0));
    let (lambda, rho) = cycle_multiplier(&p(2, c(0.0, 0.0)), &[c(1.0, 0.0)]).unwrap();
    assert_eq!((lambda, rho), (c(2.0, 0.0), c(4.0, 0.0)));
    let (_, rho) = cycle_multiplier(&p(2, c(0.25, 0.0)), &[c(0.5, 0.0)]).unwrap();
    assert_eq!(rho, c(1.0, 0.0));
    assert!(cycle_multiplier(&p(2, c(0.0, 0.0)), &[c(0.5, 0.0)]).is_err());
}

#[test]
fn classification_examples() {
    assert_eq!(classify_multiplier(c(0.0, 0.0), 1, 1e-6), Stability::Superattracting);
    assert_eq!(classify_multiplier(c(4.0, 0.0), 1, 1e-6), Stability::Repelling);
    assert_eq!(classify_multiplier(c(1.0, 0.0), 1, 1e-6), Stability::ParabolicCandidate);
    assert_eq!(classify_multiplier(c(0.5, 0.0), 2, 1e-6), Stability::Attracting);
    let cube = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0);
    assert_eq!(classify_multiplier(cube, 2, 1e-6), Stability::ParabolicCandidate);
    let irrational = Complex64::from_polar(1.0, std::f64::consts::TAU * (5f64.sqrt() - 1.0) / 2.0);
    assert_eq!(classify_multiplier(irrational, 2, 1e-6), Stability::Indifferent);
}

#[test]
fn fixed_points_of_zero_parameter() {
    let found = find_cycles(&p(2, c(0.0, 0.0)), 1, &SolveConfig::default()).unwrap();
    assert!(found.complete);
    let expected: Vec<Complex64> = std::iter::once(c(0.0, 0.0))
        .chain((0..3).map(|j| Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / 3.0)))
        .collect();
    assert_eq!(found.cycles.len(), 4);
    for e in expected {
        assert!(found.cycles.iter().any(|cy| cy.contains(e, 1e-10)), "{e}");
    }
}

/// Roots of a monic polynomial (coefficients from degree 0 upwards) as the
/// eigenvalues of its companion matrix.
fn companion_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for (i, a) in coeffs.iter().enumerate() {
        m[(i, n - 1)] = -a;
    }
    m.complex_eigenvalues().iter().map(|z| c(z.re, z.im)).collect()
}

#[test]
fn no_exact_period_two_at_zero_parameter() {
    // f∘f(z) = z^4 at c = 0; every root of z^4 − z is already fixed by f.
    let params = p(2, c(0.0, 0.0));
    for z in companion_roots(&[0.0, -1.0, 0.0, 0.0]) {
        assert!((params.step(z) - z).norm() < 1e-10, "{z}");
    }
    let found = find_cycles(&params, 2, &SolveConfig::default()).unwrap();
    assert!(found.cycles.is_empty());
}

#[test]
fn basilica_center_cycles() {
    let params = p(2, c(-1.0, 0.0));
    let cfg = SolveConfig::default();
    let two = find_cycles(&params, 2, &cfg).unwrap();
    let superattracting: Vec<_> = two
        .cycles
        .iter()
        .filter(|cy| cy.stability == Stability::Superattracting)
        .collect();
    assert_eq!(superattracting.len(), 1);
    assert!(superattracting[0].contains(c(0.0, 0.0), 1e-10) && superattracting[0].contains(c(-1.0, 0.0), 1e-10));
    let others = two
        .cycles
        .iter()
        .chain(find_cycles(&params, 1, &cfg).unwrap().cycles.iter())
        .filter(|cy| cy.stability != Stability::Superattracting)
        .count();
    assert!(others > 0);
    for cy in two.cycles.iter().chain(find_cycles(&params, 1, &cfg).unwrap().cycles.iter()) {
        if cy.stability != Stability::Superattracting {
            assert_eq!(cy.stability, Stability::Repelling);
        }
    }
}

fn arb_c() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| c(a, b))
}

fn arb_z() -> impl Strategy<Value = Complex64> {
    (-1.5..1.5f64, -1.5..1.5f64).prop_map(|(a, b)| c(a, b))
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

proptest! {
    #[test]
    fn iteration_composes(d in 2u32..5, k in arb_c(), z in arb_z(), m in 0usize..4, n in 0usize..4) {
        let params = p(d, k * 0.5);
        if let (Some(a), Some(b)) = (
            evaluate(&params, evaluate(&params, z, m).point().unwrap(), n).point(),
            evaluate(&params, z, m + n).point(),
        ) {
            prop_assert!(close(a, b, 1e-12));
        }
    }

    #[test]
    fn second_iterate_is_double_step(d in 2u32..5, k in arb_c(), z in arb_z()) {
        let params = p(d, k);
        let direct = evaluate(&params, z, 2).point().unwrap();
        prop_assert!(close(params.second_iterate().eval(z), direct, 1e-12));
    }

    #[test]
    fn conjugation_symmetry(d in 2u32..5, k in arb_c(), z in arb_z(), n in 0usize..6) {
        let a = evaluate(&p(d, k.conj()), z.conj(), n).point();
        let b = evaluate(&p(d, k), z, n).point();
        if let (Some(a), Some(b)) = (a, b) {
            prop_assert!(close(a, b.conj(), 1e-12));
        }
    }

    #[test]
    fn rotation_symmetry(d in 2u32..5, k in arb_c(), z in arb_z(), n in 0usize..5) {
        let w = MapParams::omega(d);
        let a = evaluate(&p(d, w * k), w * z, n).point();
        let b = evaluate(&p(d, k), z, n).point();
        if let (Some(a), Some(b)) = (a, b) {
            if b.norm() < 1e6 {
                prop_assert!(close(a, w * b, 1e-10));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cycles_close_and_odd_multipliers_are_real(k in (-1.8..0.4f64, -0.6..0.6f64), period in 1usize..4) {
        let params = p(2, c(k.0, k.1));
        let found = find_cycles(&params, period, &SolveConfig::default()).unwrap();
        if period != 2 {
            prop_assert!(!found.cycles.is_empty());
        }
        for cy in &found.cycles {
            prop_assert_eq!(cy.points.len(), period);
            for j in 0..period {
                prop_assert!(close(params.step(cy.points[j]), cy.points[(j + 1) % period], 1e-6));
            }
            if period % 2 == 1 {
                prop_assert!(cy.return_multiplier.im.abs() <= 1e-10 * cy.return_multiplier.norm().max(1.0));
                prop_assert!(cy.return_multiplier.re >= 0.0);
            } else {
                let rel = (cy.return_multiplier.norm() - cy.anti_derivative_product.norm()).abs();
                prop_assert!(rel <= 1e-9 * cy.return_multiplier.norm().max(1.0));
            }
        }
    }
}
