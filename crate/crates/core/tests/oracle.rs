mod common;

use bihar_core::oracle::{
    bilaplacian_numeric, divergence_numeric, gradient_numeric, laplace_beltrami_numeric, FlatMetric,
};
use bihar_core::{
    BundleConfig, DiffConfig, DiffScheme, Error, MetricField, RadialFunction, ScalarFieldOnE, SmoothFn,
    VectorFieldOnE, WeightProfile,
};
use common::*;
use nalgebra::DMatrix;

#[test]
fn flat_squared_norm_in_several_dimensions() {
    for d in 1..=6 {
        let f = ScalarFieldOnE::raw(|c| c.iter().map(|x| x * x).sum());
        let c: Vec<f64> = (0..d).map(|i| 0.2 * i as f64 - 0.5).collect();
        let v = laplace_beltrami_numeric(&FlatMetric(d), &f, &c, &DiffConfig::default()).unwrap();
        assert!((v - 2.0 * d as f64).abs() < 1e-8);
    }
}

#[test]
fn flat_harmonic_polynomial() {
    let f = ScalarFieldOnE::raw(|c| c[0] * c[0] - c[1] * c[1]);
    let v = laplace_beltrami_numeric(&FlatMetric(2), &f, &[0.7, -1.2], &DiffConfig::default()).unwrap();
    assert!(v.abs() < 1e-10, "{v}");
}

#[test]
fn linear_radial_bilaplacian_vanishes() {
    let cfg = DiffConfig::default();
    let fwd = DiffConfig::forward_mode();
    let mut g = rng(3);
    for (m, k) in [(1, 1), (2, 2)] {
        let field = flat_field(m, k, WeightProfile::sasaki());
        let f = ScalarFieldOnE::r_radial(&field, RadialFunction::linear(1.5, -0.5));
        for _ in 0..3 {
            let p = random_point(&mut g, m, k, 0.5, 2.0);
            let fd = bilaplacian_numeric(&field, &f, &p.coords(), &cfg).unwrap();
            let dual = bilaplacian_numeric(&field, &f, &p.coords(), &fwd).unwrap();
            // Nested central differences at the default steps sit on a
            // rounding floor of order 1e-5; the dual inner differential does not.
            assert!(fd.abs() < 1e-4, "{fd}");
            assert!(dual.abs() < 1e-6, "{dual}");
        }
    }
}

#[test]
fn inverse_norm_lift_is_biharmonic_numerically() {
    let base = bihar_core::BaseChart::euclidean(vec![(0.2, 2.0); 5]).unwrap();
    let w = WeightProfile::new("c", SmoothFn::constant(0.3), SmoothFn::zero()).unwrap();
    let field = MetricField::new(base, BundleConfig::trivial(1).unwrap(), w).unwrap();
    let f = ScalarFieldOnE::vertical_lift(&field, bihar_core::families::base_example_inverse_norm(5).unwrap());
    let v = bilaplacian_numeric(&field, &f, &[0.8, 0.9, 1.0, 1.1, 0.7, 0.4], &DiffConfig::default()).unwrap();
    assert!(v.abs() < 1e-4, "{v}");
}

#[test]
fn gradient_examples() {
    let cfg = DiffConfig::default();
    let field = flat_field(2, 2, WeightProfile::sasaki());
    let rf = RadialFunction::polynomial(vec![0.0, 1.0, 0.5]);
    let p = point(vec![0.1, 0.3], 2, 0.9);
    let num = gradient_numeric(&field, &ScalarFieldOnE::r_radial(&field, rf.clone()), &p.coords(), &cfg).unwrap();
    let a1 = rf.derivative(1, 0.9).unwrap();
    let expected = [0.0, 0.0, 2.0 * a1 * p.u[0], 2.0 * a1 * p.u[1]];
    for (a, b) in num.iter().zip(expected) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn divergence_of_tautological_field_under_sasaki_is_rank() {
    for k in 1..=4 {
        let field = flat_field(2, k, WeightProfile::sasaki());
        let p = point(vec![0.1, 0.3], k, 0.9);
        let v = divergence_numeric(&field, &VectorFieldOnE::tautological(2, k), &p.coords(), &DiffConfig::default())
            .unwrap();
        assert!((v - k as f64).abs() < 1e-10);
    }
}

#[test]
fn halving_the_step_quarters_the_error() {
    let field = flat_field(1, 2, mixed());
    let rf = RadialFunction::new(SmoothFn::exp(1.0, -0.7)).unwrap();
    let f = ScalarFieldOnE::r_radial(&field, rf.clone());
    let p = point(vec![0.2], 2, 1.1);
    let exact = bihar_core::closed_form::laplacian_radial(&rf, field.weights(), 1, 2, 1.1).unwrap();
    let err = |h: f64| {
        let cfg = DiffConfig { base_step: h, richardson_levels: 1, ..DiffConfig::default() };
        (laplace_beltrami_numeric(&field, &f, &p.coords(), &cfg).unwrap() - exact).abs()
    };
    let (coarse, fine) = (err(0.04), err(0.02));
    assert!(coarse / fine >= 3.5, "{coarse} / {fine}");
}

#[test]
fn divergence_of_gradient_is_laplacian() {
    let field = flat_field(2, 2, mixed());
    let f = ScalarFieldOnE::r_radial(&field, RadialFunction::polynomial(vec![0.0, 0.5, -0.3, 0.1]));
    let cfg = DiffConfig::default();
    let grad = {
        let (field, f, cfg) = (field.clone(), f.clone(), cfg);
        VectorFieldOnE::new(move |c| gradient_numeric(&field, &f, c, &cfg).unwrap_or_else(|_| vec![f64::NAN; 4]))
    };
    let p = point(vec![0.3, -0.1], 2, 0.8);
    let div = divergence_numeric(&field, &grad, &p.coords(), &cfg).unwrap();
    let lap = laplace_beltrami_numeric(&field, &f, &p.coords(), &cfg).unwrap();
    assert!(close(div, lap, 1e-6), "{div} vs {lap}");
}

#[test]
fn rescaling_fiber_coordinates_leaves_radial_laplacian_unchanged() {
    let rf = RadialFunction::polynomial(vec![1.0, -0.4, 0.2]);
    let t = 2.5;
    let plain = flat_field(2, 2, mixed());
    let scaled = MetricField::new(
        euclidean(2, 4.0),
        BundleConfig::new(2, DMatrix::identity(2, 2) / (t * t)).unwrap(),
        mixed(),
    )
    .unwrap();
    let p = point(vec![0.2, 0.1], 2, 0.9);
    let q = p.scale_fiber(t);
    let cfg = DiffConfig::default();
    let a = laplace_beltrami_numeric(&plain, &ScalarFieldOnE::r_radial(&plain, rf.clone()), &p.coords(), &cfg).unwrap();
    let b = laplace_beltrami_numeric(&scaled, &ScalarFieldOnE::r_radial(&scaled, rf), &q.coords(), &cfg).unwrap();
    assert!((a - b).abs() < 1e-8, "{a} vs {b}");
}

#[test]
fn forward_mode_agrees_with_central_differences() {
    let field = flat_field(2, 2, mixed());
    let f = ScalarFieldOnE::r_radial(&field, RadialFunction::polynomial(vec![0.0, 0.5, -0.3, 0.1]));
    let p = point(vec![0.3, -0.1], 2, 0.8);
    let fd = laplace_beltrami_numeric(&field, &f, &p.coords(), &DiffConfig::default()).unwrap();
    let fwd = laplace_beltrami_numeric(&field, &f, &p.coords(), &DiffConfig::forward_mode()).unwrap();
    assert!(close(fd, fwd, 1e-8));
    assert_eq!(DiffConfig::forward_mode().scheme, DiffScheme::ForwardMode);
}

#[test]
fn stencil_leaving_domain_is_a_domain_error() {
    let field = flat_field(1, 1, WeightProfile::sasaki());
    let f = ScalarFieldOnE::r_radial(&field, RadialFunction::linear(1.0, 0.0));
    let edge = [4.0, 0.5];
    assert!(matches!(
        laplace_beltrami_numeric(&field, &f, &edge, &DiffConfig::default()),
        Err(Error::Domain(_))
    ));
}
