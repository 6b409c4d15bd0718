use npl_core::energy::{energy_identity_problem2, green_residual_problem2};
use npl_core::modes::{Convention, Problem2Mode, ProblemSpec, Variant};
use npl_core::quadrature::gauss_quad;
use npl_core::C64;
use proptest::prelude::*;

#[test]
fn quadrature_matches_polynomial_exactness_and_self_convergence() {
    assert!(
        (gauss_quad(|p| p[0] * p[1], &[(0.0, 1.0), (0.0, 1.0)], 2).unwrap() - 0.25).abs() <= 1e-15
    );
    let f = |p: &[f64]| (p[0] * 3.0).sin() * (p[1] - p[2]).exp();
    let box3 = [(0.0, 1.0), (-1.0, 0.5), (0.0, 2.0)];
    let a = gauss_quad(f, &box3, 20).unwrap();
    let b = gauss_quad(f, &box3, 40).unwrap();
    assert!((a - b).abs() <= 1e-12);
    assert!(gauss_quad(f, &[(0.0, 1.0); 4], 4).is_err());
}

#[test]
fn mode_identity_defect_shrinks_with_order() {
    let spec = ProblemSpec::new(
        1.0,
        1.0,
        C64::new(0.5, 0.0),
        C64::new(0.0, 0.0),
        Variant::Problem2,
    )
    .unwrap();
    let mode = Problem2Mode::new(1, 1, 0, &spec, Convention::Consistent).unwrap();
    let defects: Vec<f64> = [8, 16, 32, 64]
        .iter()
        .map(|q| {
            energy_identity_problem2(&mode, &mode.spec(), *q)
                .unwrap()
                .defect
        })
        .collect();
    assert!(defects[2] <= 1e-8, "{defects:?}");
    for w in defects.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{defects:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn green_cross_check_on_polynomials(
        c in prop::array::uniform4(-2.0f64..2.0),
        lambda_re in -5.0f64..5.0,
        lambda_im in -5.0f64..5.0,
        m in prop::sample::select(vec![1.0, 2.0]),
        n in prop::sample::select(vec![1.0, 2.0]),
    ) {
        let u = move |x: f64, y: f64, t: f64| {
            C64::new(c[0] + c[1] * x * y + c[2] * t * x * x, c[3] * y * (1.0 - t) + x)
        };
        let spec = ProblemSpec::new(m, n, C64::new(0.5, 0.0), C64::new(lambda_re, lambda_im), Variant::Problem2).unwrap();
        let report = energy_identity_problem2(&u, &spec, 32).unwrap();
        let green = green_residual_problem2(&u, &spec, 32).unwrap();
        prop_assert!((report.signed_defect() + green).abs() <= 1e-7, "{} vs {}", report.signed_defect(), green);
    }
}
