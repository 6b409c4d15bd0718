use std::f64::consts::PI;

use npl_core::specfun::{
    bessel_i, bessel_j, bessel_j_asymptotic, bessel_j_prime, bessel_j_with, SeriesPolicy,
};
use proptest::prelude::*;

/// Unevaluated sum `hi + lo` with roughly 32 significant digits.
#[derive(Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn new(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = Self::two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = Self::two_sum(s, e);
        Dd { hi, lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = Self::two_sum(p, e);
        Dd { hi, lo }
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn div(self, d: Dd) -> Dd {
        let q = self.hi / d.hi;
        let r = self.add(Dd::new(q).mul(d).neg());
        let (hi, lo) = Self::two_sum(q, r.hi / d.hi);
        Dd { hi, lo }
    }
}

/// `J_nu(x)` by its ascending series in double-double arithmetic.
/// `gamma_nu1 = Gamma(nu + 1)` and `x^nu` enter once as double factors.
fn j_series_dd(nu: f64, gamma_nu1: f64, x: f64) -> f64 {
    let q = Dd::new(x).mul(Dd::new(x)).mul(Dd::new(-0.25));
    let mut term = Dd::new(1.0);
    let mut sum = Dd::new(1.0);
    for k in 1..200 {
        let kf = k as f64;
        let (s, e) = Dd::two_sum(kf, nu);
        term = term.mul(q).div(Dd::new(kf).mul(Dd { hi: s, lo: e }));
        sum = sum.add(term);
        if term.hi.abs() < 1e-34 * sum.hi.abs().max(1e-300) {
            break;
        }
    }
    (sum.hi + sum.lo) * (0.5 * x).powf(nu) / gamma_nu1
}

#[test]
fn half_order_closed_forms() {
    let mut worst_j = 0.0f64;
    let mut worst_i = 0.0f64;
    for i in 0..=2000 {
        let x = 0.01 + (20.0 - 0.01) * i as f64 / 2000.0;
        let scale = (2.0 / (PI * x)).sqrt();
        worst_j = worst_j.max((bessel_j(0.5, x).unwrap() - scale * x.sin()).abs());
        let exact_i = scale * x.sinh();
        worst_i = worst_i.max((bessel_i(0.5, x).unwrap() - exact_i).abs() / exact_i.max(1.0));
    }
    assert!(worst_j <= 1e-12, "J_1/2 sup error {worst_j:e}");
    assert!(worst_i <= 1e-12, "I_1/2 sup error {worst_i:e}");
}

#[test]
fn agrees_with_double_double_series() {
    // Gamma(nu + 1) from mpmath.
    let cases = [
        (1.0 / 3.0, 0.892_979_511_569_249_2),
        (0.25, 0.906_402_477_055_477_1),
        (0.5, 0.886_226_925_452_758),
    ];
    for (nu, g) in cases {
        for i in 1..=400 {
            let x = 20.0 * i as f64 / 400.0;
            let reference = j_series_dd(nu, g, x);
            let got = bessel_j(nu, x).unwrap();
            assert!(
                (got - reference).abs() <= 1e-13 * reference.abs().max(0.1),
                "nu = {nu}, x = {x}: {got} vs {reference}"
            );
        }
    }
}

#[test]
fn paths_agree_around_switch_point() {
    let policy = SeriesPolicy::default();
    // The asymptotic path with a relaxed target reaches below the switch;
    // the recurrence path is forced above it by moving the switch.
    let relaxed = SeriesPolicy {
        target_eps: 1e-13,
        ..policy
    };
    let late_switch = SeriesPolicy {
        switch_point: 30.0,
        ..policy
    };
    for nu in [0.25, 1.0 / 3.0, 0.5, 1.0, 2.0] {
        for i in 0..=200 {
            let x = 17.0 + 2.0 * i as f64 / 200.0;
            let asymptotic = bessel_j_asymptotic(nu, x, &relaxed).unwrap();
            let recurrence = bessel_j_with(nu, x, &late_switch).unwrap();
            let envelope = (2.0 / (PI * x)).sqrt();
            assert!(
                (asymptotic - recurrence).abs() <= 1e-9 * envelope,
                "nu = {nu}, x = {x}: {asymptotic} vs {recurrence}"
            );
        }
    }
}

proptest! {
    #[test]
    fn three_term_recurrence(nu in 0.25f64..=2.0, x in 1e-3f64..=30.0) {
        let (a, b, c) = (bessel_j(nu - 1.0, x).unwrap(), bessel_j(nu, x).unwrap(), bessel_j(nu + 1.0, x).unwrap());
        let defect = (a + c - 2.0 * nu / x * b).abs();
        prop_assert!(defect <= 1e-10 * b.abs().max(1.0), "defect {defect:e}");
    }

    #[test]
    fn modified_bessel_is_positive(nu in 1e-6f64..=2.0, x in 1e-6f64..=20.0) {
        prop_assert!(bessel_i(nu, x).unwrap() > 0.0);
    }

    #[test]
    fn derivative_matches_difference_quotient(nu in 0.0f64..=2.0, x in 0.5f64..=40.0) {
        let h = 1e-5;
        let fd = (bessel_j(nu, x + h).unwrap() - bessel_j(nu, x - h).unwrap()) / (2.0 * h);
        prop_assert!((bessel_j_prime(nu, x).unwrap() - fd).abs() <= 1e-8);
    }
}
