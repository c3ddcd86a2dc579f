mod common;

use bihar_core::closed_form::{bilaplacian_radial, laplacian_radial};
use bihar_core::families::{
    base_example_inverse_norm, classify, equation_e_residual, exponent_quadratic, exponent_roots,
    power_residual, power_residual_exact, radial_family, sasaki_radial_residual, Rational,
};
use bihar_core::{
    Classification, DiffConfig, Error, FamilyCase, FamilyParams, RadialFunction, SmoothFn, WeightProfile,
};
use common::*;
use num_traits::Zero;
use proptest::prelude::*;

fn log_weight(c: f64) -> WeightProfile {
    WeightProfile::new("log", SmoothFn::log(c), SmoothFn::zero()).unwrap()
}

#[test]
fn equation_e_constant_horizontal_weight() {
    let w = WeightProfile::new("c", SmoothFn::constant(0.7), SmoothFn::exp(1.0, 0.4)).unwrap();
    for (m, k) in [(1, 1), (2, 5), (4, 3)] {
        let e = equation_e_residual(&w, m, k, 1.3).unwrap();
        assert_eq!((e.e, e.e_prime), (0.0, 0.0));
    }
}

#[test]
fn equation_e_linear_horizontal() {
    let e = equation_e_residual(&WeightProfile::linear_horizontal(), 2, 2, 1.0).unwrap();
    assert_eq!(e.e, 2.0);
    assert_eq!(e.e_prime, 2.0);
}

#[test]
fn equation_e_logarithmic_solution_in_rank_two_over_surfaces() {
    for c in [0.5, -1.25, 3.0] {
        for r in [0.5, 1.0, 2.0] {
            let e = equation_e_residual(&log_weight(c), 2, 2, r).unwrap();
            assert!(e.e.abs() < 1e-14 && e.e_prime.abs() < 1e-14, "{e:?}");
        }
    }
}

#[test]
fn equation_e_rejects_negative_radius() {
    assert!(matches!(
        equation_e_residual(&WeightProfile::sasaki(), 1, 1, -0.1),
        Err(Error::Domain(_))
    ));
}

#[test]
fn sasaki_residual_examples() {
    let lin = RadialFunction::linear(3.0, -2.0);
    for k in 1..=6 {
        assert_eq!(sasaki_radial_residual(&lin, k, 0.9).unwrap(), 0.0);
    }
    let fam = radial_family(&FamilyParams::new(1, FamilyCase::K1, 1.0, 0.0, 0.0).unwrap()).unwrap();
    assert!(sasaki_radial_residual(&fam, 1, 2.0).unwrap().abs() < 1e-15);
    let sq = RadialFunction::polynomial(vec![0.0, 0.0, 1.0]);
    assert_eq!(sasaki_radial_residual(&sq, 2, 1.0).unwrap(), 16.0);
}

#[test]
fn sasaki_residual_rejects_radius_below_domain() {
    let fam = radial_family(&FamilyParams::new(2, FamilyCase::K2, 1.0, 0.0, 0.0).unwrap()).unwrap();
    assert!(matches!(sasaki_radial_residual(&fam, 2, 1e-4), Err(Error::Domain(_))));
}

#[test]
fn exponent_roots_small_ranks() {
    let r1 = exponent_roots(1).unwrap();
    assert_eq!(r1.roots, vec![Rational::from_integer(-1), Rational::new(-3, 2)]);
    assert!(!r1.double);
    assert_eq!(r1.discriminant, 1);
    assert_eq!(r1.to_string(), "-1, -3/2");

    let r2 = exponent_roots(2).unwrap();
    assert_eq!(r2.roots, vec![Rational::from_integer(-2)]);
    assert!(r2.double);
    assert_eq!(r2.discriminant, 0);
    assert_eq!(r2.to_string(), "-2 (double)");
}

#[test]
fn exponent_roots_are_exact_for_all_ranks() {
    for k in 1..=40usize {
        let roots = exponent_roots(k).unwrap();
        assert_eq!(roots.discriminant, (k as i64 - 2).pow(2));
        assert_eq!(roots.roots[0], Rational::from_integer(-(k as i64)));
        for n in &roots.roots {
            assert!(exponent_quadratic(k, *n).is_zero(), "k={k}, n={n}");
        }
    }
}

#[test]
fn exponent_roots_rank_six() {
    // The second root is −(k+2)/2; it coincides with −k/2 only for k ≤ 2.
    let r = exponent_roots(6).unwrap();
    assert_eq!(r.roots, vec![Rational::from_integer(-6), Rational::from_integer(-4)]);
    assert!(!exponent_quadratic(6, Rational::from_integer(-3)).is_zero());
}

#[test]
fn exponent_roots_rejects_rank_zero() {
    assert!(matches!(exponent_roots(0), Err(Error::Domain(_))));
}

#[test]
fn root_powers_solve_the_reduced_equation_exactly() {
    let samples = [Rational::new(1, 4), Rational::from_integer(1), Rational::new(9, 4), Rational::from_integer(4)];
    for k in 1..=8 {
        for n in exponent_roots(k).unwrap().roots {
            for r in samples {
                assert!(power_residual_exact(k, n, r).unwrap().is_zero(), "k={k} n={n} r={r}");
            }
        }
    }
}

#[test]
fn family_constructor_examples() {
    let k2 = radial_family(&FamilyParams::new(2, FamilyCase::K2, 1.0, 0.0, 0.0).unwrap()).unwrap();
    for r in [0.5, 1.0, 3.0] {
        let d = k2.derivs(r).unwrap();
        assert!((d[0] + libm::log(r)).abs() < 1e-15);
        assert!((d[2] - 1.0 / (r * r)).abs() < 1e-14);
    }
    let k3 = radial_family(&FamilyParams::new(3, FamilyCase::KOdd, 1.0, 0.0, 0.0).unwrap()).unwrap();
    assert!((k3.value(2.0).unwrap() - 0.25).abs() < 1e-15);
    assert!(k3.singular_at_zero());
    assert_eq!(k3.domain_min(), 1e-3);
}

#[test]
fn even_b_family_in_rank_four_is_logarithmic() {
    let fam = radial_family(&FamilyParams::new(4, FamilyCase::KEvenB, 1.0, 0.0, 0.0).unwrap()).unwrap();
    for r in [0.2, 1.0, 5.0] {
        let d = fam.derivs(r).unwrap();
        assert!(d.iter().all(|v| v.is_finite()));
        assert!((d[2] - 1.0 / (r * r)).abs() < 1e-13);
        assert!((d[0] + libm::log(r)).abs() < 1e-14);
    }
}

#[test]
fn family_case_mismatch_is_a_config_error() {
    assert!(matches!(FamilyParams::new(5, FamilyCase::KEvenB, 1.0, 0.0, 0.0), Err(Error::Config(_))));
    assert!(matches!(FamilyParams::new(4, FamilyCase::KOdd, 1.0, 0.0, 0.0), Err(Error::Config(_))));
    assert!(matches!(FamilyParams::new(3, FamilyCase::K1, 1.0, 0.0, 0.0), Err(Error::Config(_))));
    assert!(matches!(FamilyParams::new(2, FamilyCase::K2, 0.0, 1.0, 0.0), Err(Error::Config(_))));
    assert!("kevenb".parse::<FamilyCase>().is_ok());
    assert!("k7".parse::<FamilyCase>().is_err());
}

#[test]
fn classify_examples() {
    let sasaki = WeightProfile::sasaki();
    let grid: Vec<f64> = (1..=20).map(|i| 0.25 * i as f64).collect();
    for k in 1..=4 {
        let proper = classify(&RadialFunction::linear(1.5, 2.0), &sasaki, 2, k, &grid).unwrap();
        assert_eq!(proper.class, Classification::ProperBiharmonic);
        assert_eq!(proper.max_laplacian, 2.0 * k as f64 * 1.5);
        let harmonic = classify(&RadialFunction::constant(2.0), &sasaki, 2, k, &grid).unwrap();
        assert_eq!(harmonic.class, Classification::Harmonic);
        let sq = classify(&RadialFunction::polynomial(vec![0.0, 0.0, 1.0]), &sasaki, 2, k, &grid).unwrap();
        assert_eq!(sq.class, Classification::NotBiharmonic);
    }
}

#[test]
fn classify_rejects_empty_grid() {
    assert!(matches!(
        classify(&RadialFunction::constant(1.0), &WeightProfile::sasaki(), 1, 1, &[]),
        Err(Error::Config(_))
    ));
}

#[test]
fn family_classifications_are_recorded() {
    // Outcomes of the closed forms for each family; reported rather than
    // taken from the family statement.
    let sasaki = WeightProfile::sasaki();
    let grid: Vec<f64> = (1..=20).map(|i| 0.2 * i as f64).collect();
    let mut seen = Vec::new();
    for k in 1..=8 {
        for case in FamilyCase::for_rank(k) {
            let fam = radial_family(&FamilyParams::new(k, case, 1.0, 0.5, -0.25).unwrap()).unwrap();
            let c = classify(&fam, &sasaki, 2, k, &grid).unwrap();
            seen.push((k, case, c.class));
        }
    }
    for (k, case, class) in &seen {
        let expected = match case {
            FamilyCase::KEvenB | FamilyCase::K2 => Classification::ProperBiharmonic,
            _ => Classification::NotBiharmonic,
        };
        assert_eq!(*class, expected, "k={k} {case}");
    }
}

#[test]
fn inverse_norm_examples() {
    let f3 = base_example_inverse_norm(3).unwrap();
    let f5 = base_example_inverse_norm(5).unwrap();
    let f4 = base_example_inverse_norm(4).unwrap();
    let x3 = [0.3, -0.8, 1.1];
    let x5 = [0.3, -0.8, 1.1, 0.5, 0.2];
    assert_eq!(f3.laplacian(&x3).unwrap(), 0.0);
    assert_eq!(f5.bilaplacian(&x5).unwrap(), 0.0);
    let v = f5.value(&x5).unwrap();
    assert!((f5.laplacian(&x5).unwrap() + 2.0 * v * v * v).abs() < 1e-15);
    let unit = [0.5, 0.5, 0.5, 0.5];
    assert!((f4.bilaplacian(&unit).unwrap() + 3.0).abs() < 1e-14);

    let chart = bihar_core::BaseChart::euclidean(vec![(0.1, 2.0); 4]).unwrap();
    let num = bihar_core::oracle::bilaplacian_numeric(&chart, &f4, &[0.5, 0.6, 0.7, 0.8], &DiffConfig::default())
        .unwrap();
    let an = f4.bilaplacian(&[0.5, 0.6, 0.7, 0.8]).unwrap();
    assert!(close(num, an, 1e-4), "{num} vs {an}");
    assert!(matches!(base_example_inverse_norm(1), Err(Error::Config(_))));
}

#[test]
fn float_power_residual_agrees_with_quadratic() {
    for k in 1..=6 {
        for n in [-3.0, -1.5, 0.5, 2.0] {
            let r = 1.7;
            let q = 2.0 * n * n + (3.0 * k as f64 + 2.0) * n + (k * (k + 2)) as f64;
            assert!((power_residual(k, n, r) - q * libm::pow(r, n)).abs() < 1e-10);
        }
    }
}

fn case_strategy() -> impl Strategy<Value = (usize, FamilyCase)> {
    (1usize..=8).prop_flat_map(|k| {
        let cases = FamilyCase::for_rank(k);
        (Just(k), proptest::sample::select(cases))
    })
}

fn nonzero_beta() -> impl Strategy<Value = f64> {
    prop_oneof![-2.0..-0.01f64, 0.01..2.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn equation_forms_agree(
        a in -2.0..2.0f64, b in -2.0..2.0f64, c in -1.0..1.0f64, d in -1.0..1.0f64,
        m in 1usize..6, k in 1usize..6, r in 0.0..5.0f64,
    ) {
        let w = WeightProfile::new("p", SmoothFn::polynomial(vec![0.0, a, b]), SmoothFn::exp(c, d)).unwrap();
        let e = equation_e_residual(&w, m, k, r).unwrap();
        prop_assert!((e.e - e.e_prime).abs() <= 1e-12 * (1.0 + e.e.abs()));
    }

    #[test]
    fn family_second_derivative_is_the_power(
        (k, case) in case_strategy(), beta in nonzero_beta(), gamma in -2.0..2.0f64,
        delta in -2.0..2.0f64, r in 0.1..10.0f64,
    ) {
        let fam = radial_family(&FamilyParams::new(k, case, beta, gamma, delta).unwrap()).unwrap();
        let n = case.exponent(k).unwrap() as f64;
        let a2 = fam.derivative(2, r).unwrap();
        prop_assert!((a2 - beta * libm::pow(r, n)).abs() <= 1e-12 * (1.0 + a2.abs()));
    }

    #[test]
    fn linear_radial_is_biharmonic_for_any_weights(
        a in -2.0..2.0f64, b in -2.0..2.0f64, m in 1usize..4, k in 1usize..5, r in 0.1..3.0f64,
    ) {
        let sasaki = WeightProfile::sasaki();
        let rf = RadialFunction::linear(a, b);
        prop_assert_eq!(bilaplacian_radial(&rf, &sasaki, m, k, r).unwrap(), 0.0);
        prop_assert_eq!(laplacian_radial(&rf, &sasaki, m, k, r).unwrap(), 2.0 * k as f64 * a);
    }
}
