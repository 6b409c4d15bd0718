use npl_core::dispersion::{
    dispersion_determinant, normalized_determinant, scan_roots, sigma_branch, verify_candidate,
    Region, TransmissionProblem,
};
use npl_core::C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn det4(m: &[[C64; 4]; 4]) -> C64 {
    // Cofactor expansion along the first row.
    let mut total = C64::new(0.0, 0.0);
    for col in 0..4 {
        let mut minor = [[C64::new(0.0, 0.0); 3]; 3];
        for r in 1..4 {
            let mut cc = 0;
            for c in 0..4 {
                if c != col {
                    minor[r - 1][cc] = m[r][c];
                    cc += 1;
                }
            }
        }
        let d3 = minor[0][0] * (minor[1][1] * minor[2][2] - minor[1][2] * minor[2][1])
            - minor[0][1] * (minor[1][0] * minor[2][2] - minor[1][2] * minor[2][0])
            + minor[0][2] * (minor[1][0] * minor[2][1] - minor[1][1] * minor[2][0]);
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * m[0][col] * d3;
    }
    total
}

/// Determinant in the basis `exp(w+ x), exp(-w+ x)` (x > 0), `exp(w- x), exp(-w- x)` (x < 0).
fn exponential_determinant(lambda: C64, p: &TransmissionProblem) -> (C64, C64, C64) {
    let [k1, k2, k3, k4, k5, k6] = p.k;
    let sigma = sigma_branch(C64::new(p.alpha, 0.0), p.s);
    let wp = (lambda + sigma).sqrt();
    let wm = (lambda - sigma).sqrt();
    let one = C64::new(1.0, 0.0);
    // Values and slopes at x = 1 (right pair) and x = -1 (left pair).
    let (ep, em) = (wp.exp(), (-wp).exp());
    let (fp, fm) = ((-wm).exp(), wm.exp());
    let right = [(ep, wp * ep), (em, -wp * em)];
    let left = [(fp, wm * fp), (fm, -wm * fm)];
    let rows = [
        [one, one, -one, -one],
        [wp, -wp, -wm, wm],
        [
            -k3 * right[0].1,
            -k3 * right[1].1,
            k1 * left[0].1 + k2 * left[0].0,
            k1 * left[1].1 + k2 * left[1].0,
        ],
        [
            k4 * right[0].1 + k5 * right[0].0,
            k4 * right[1].1 + k5 * right[1].0,
            -k6 * left[0].1,
            -k6 * left[1].1,
        ],
    ];
    (det4(&rows), wp, wm)
}

fn k_strategy() -> impl Strategy<Value = [f64; 6]> {
    prop::array::uniform6(-2.0f64..2.0)
}

proptest! {
    #[test]
    fn matches_exponential_basis_cofactor_expansion(
        k in k_strategy(),
        alpha in prop::sample::select(vec![1.0, 0.5, -0.7, 2.0]),
        s in -2i64..=2,
        re in -20.0f64..20.0,
        im in -20.0f64..20.0,
    ) {
        let p = TransmissionProblem::new(k, alpha, s).unwrap();
        let lambda = C64::new(re, im);
        let (exp_det, wp, wm) = exponential_determinant(lambda, &p);
        let ours = dispersion_determinant(lambda, &p);
        let expected = exp_det / (4.0 * wp * wm);
        prop_assert!((ours - expected).norm() <= 1e-9 * expected.norm().max(ours.norm()).max(1.0),
            "{ours} vs {expected}");
    }

    #[test]
    fn branch_closure(alpha_re in -3.0f64..3.0, alpha_im in -3.0f64..3.0, s in -5i64..=5) {
        let alpha = C64::new(alpha_re, alpha_im);
        prop_assume!(alpha.norm() > 1e-3);
        prop_assert!((sigma_branch(alpha, s).exp() * alpha - C64::new(1.0, 0.0)).norm() <= 1e-14 * (1.0 + s.unsigned_abs() as f64));
    }

    #[test]
    fn coefficient_scaling_preserves_zero_set(c in prop::sample::select(vec![-3.0, 0.25, 7.0]), re in -20.0f64..20.0, im in -5.0f64..5.0) {
        let base = TransmissionProblem::new([1.0, 0.5, -2.0, 0.3, 1.0, 0.7], 0.6, 1).unwrap();
        let scaled = TransmissionProblem::new(base.k.map(|v| v * c), 0.6, 1).unwrap();
        let lambda = C64::new(re, im);
        let a = dispersion_determinant(lambda, &base) * (c * c);
        let b = dispersion_determinant(lambda, &scaled);
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        prop_assert!((normalized_determinant(lambda, &base) - normalized_determinant(lambda, &scaled)).abs() <= 1e-12);
    }
}

#[test]
fn scaled_coefficients_give_identical_candidates() {
    let region = Region {
        re: (-40.0, 5.0),
        im: (-15.0, 15.0),
    };
    let base = TransmissionProblem::new([1.0, -1.0, 1.0, 1.0, 1.0, -1.0], 1.0, 1).unwrap();
    let scaled = TransmissionProblem::new(base.k.map(|v| -2.5 * v), 1.0, 1).unwrap();
    let a = scan_roots(region, (91, 61), &base).unwrap();
    let b = scan_roots(region, (91, 61), &scaled).unwrap();
    assert!(!a.candidates.is_empty());
    assert_eq!(a.candidates.len(), b.candidates.len());
    for (x, y) in a.candidates.iter().zip(&b.candidates) {
        assert!((x.lambda - y.lambda).norm() <= 1e-8);
    }
}

#[test]
fn determinant_is_lipschitz_in_lambda() {
    let p = TransmissionProblem::new([1.0, 0.5, -2.0, 0.3, 1.0, 0.7], 0.6, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let lambda = C64::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
        let dir = C64::from_polar(1.0, rng.random_range(0.0..6.3));
        let slope = |h: f64| {
            (dispersion_determinant(lambda + dir * h, &p) - dispersion_determinant(lambda, &p))
                .norm()
                / h
        };
        let (s1, s2) = (slope(1e-4), slope(1e-5));
        assert!(
            (s1 - s2).abs() <= 1e-3 * s1.max(1e-12),
            "{s1} vs {s2} at {lambda}"
        );
    }
}

#[test]
fn every_candidate_satisfies_nonlocal_condition() {
    for s in -2..=2 {
        let p = TransmissionProblem::new([1.0, -1.0, 1.0, 1.0, 1.0, -1.0], 1.0, s).unwrap();
        let scan = scan_roots(
            Region {
                re: (-60.0, 10.0),
                im: (-40.0, 40.0),
            },
            (141, 161),
            &p,
        )
        .unwrap();
        for c in &scan.candidates {
            assert!(
                c.verification.nonlocal_residual <= 1e-8,
                "{:?}",
                c.verification
            );
            assert!(verify_candidate(c.lambda, &p).passed);
        }
    }
}
