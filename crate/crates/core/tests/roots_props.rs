use std::f64::consts::PI;

use npl_core::roots::{bessel_j_zeros, eigenvalue_mu, newton_step};
use proptest::prelude::*;

#[test]
fn half_order_zeros_are_k_pi() {
    let table = bessel_j_zeros(0.5, 20).unwrap();
    for (k, z) in table.zeros.iter().enumerate() {
        assert!(
            (z - (k + 1) as f64 * PI).abs() <= 1e-10,
            "zero {}: {z}",
            k + 1
        );
    }
}

#[test]
fn zeros_interlace() {
    let orders = [0.25, 1.0 / 3.0, 0.5, 1.25, 4.0 / 3.0, 1.5];
    let tables: Vec<_> = orders
        .iter()
        .map(|nu| bessel_j_zeros(*nu, 30).unwrap())
        .collect();
    for (a, ta) in orders.iter().zip(&tables) {
        for (b, tb) in orders.iter().zip(&tables) {
            if !(a < b && *b <= a + 1.0) {
                continue;
            }
            for k in 0..29 {
                assert!(ta.zeros[k] < tb.zeros[k], "nu {a} vs {b}, k = {}", k + 1);
                assert!(
                    tb.zeros[k] < ta.zeros[k + 1],
                    "nu {a} vs {b}, k = {}",
                    k + 1
                );
            }
        }
    }
}

#[test]
fn newton_refinement_is_idempotent() {
    for nu in [0.0, 0.25, 1.0 / 3.0, 0.5, 2.0] {
        let table = bessel_j_zeros(nu, 200).unwrap();
        for z in &table.zeros {
            let moved = (newton_step(nu, *z).unwrap() - z).abs();
            assert!(
                moved <= 1e-13 * z.max(1.0),
                "nu = {nu}, z = {z}, moved {moved:e}"
            );
        }
    }
}

proptest! {
    #[test]
    fn eigenvalue_map_is_monotone(z in 0.1f64..500.0, dz in 1e-6f64..10.0, e in 0.01f64..5.0, de in 1e-6f64..5.0) {
        let base = eigenvalue_mu(z, e).unwrap();
        prop_assert!(eigenvalue_mu(z + dz, e).unwrap() > base);
        prop_assert!(eigenvalue_mu(z, e + de).unwrap() > base);
    }
}
