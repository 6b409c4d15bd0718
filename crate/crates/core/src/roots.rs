//! Positive zeros of `J_nu` and the map from a zero to the eigenvalue of
//! `X'' + mu x^n X = 0`, `X(0) = X(1) = 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::specfun::{bessel_j, bessel_j_prime};
use crate::{Error, Result};

/// Most zeros a single table may request.
pub const MAX_ZERO_COUNT: usize = 200;

/// Largest residual `|J_nu(z)|` accepted for a tabulated zero.
pub const ZERO_RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroTable {
    pub nu: f64,
    /// Ascending positive zeros; `zeros[k - 1]` is the k-th zero.
    pub zeros: Vec<f64>,
    /// `|J_nu(zero)|` for each entry of `zeros`.
    pub residuals: Vec<f64>,
}

impl ZeroTable {
    /// The k-th zero, `k >= 1`.
    pub fn zero(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.zeros.get(i).copied())
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if !(0.0..=2.0).contains(&nu) {
        return Err(Error::domain(
            "bessel_j_zeros",
            format!("order nu = {nu} outside [0, 2]"),
        ));
    }
    Ok(())
}

/// McMahon's leading estimate `(k + nu/2 - 1/4) pi` of the k-th zero.
pub fn mcmahon_estimate(nu: f64, k: usize) -> f64 {
    (k as f64 + 0.5 * nu - 0.25) * PI
}

/// The first `count` positive zeros of `J_nu`.
pub fn bessel_j_zeros(nu: f64, count: usize) -> Result<ZeroTable> {
    check_nu(nu)?;
    if count == 0 || count > MAX_ZERO_COUNT {
        return Err(Error::InvalidInput(format!(
            "zero count must lie in 1..={MAX_ZERO_COUNT}, got {count}"
        )));
    }
    let mut zeros = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    let mut previous = 0.0;
    for k in 1..=count {
        let z = locate_zero(nu, k, previous)?;
        residuals.push(bessel_j(nu, z)?.abs());
        zeros.push(z);
        previous = z;
    }
    Ok(ZeroTable {
        nu,
        zeros,
        residuals,
    })
}

/// The k-th positive zero of `J_nu`, `k >= 1`.
pub fn bessel_j_zero(nu: f64, k: usize) -> Result<f64> {
    check_nu(nu)?;
    if k == 0 || k > MAX_ZERO_COUNT {
        return Err(Error::InvalidInput(format!(
            "zero index must lie in 1..={MAX_ZERO_COUNT}, got {k}"
        )));
    }
    let previous = if k > 1 {
        // The (k-1)-th zero lies below the k-th bracket; only a lower bound is needed.
        (mcmahon_estimate(nu, k) - PI).max(0.0)
    } else {
        0.0
    };
    locate_zero(nu, k, previous)
}

fn locate_zero(nu: f64, k: usize, previous: f64) -> Result<f64> {
    let f = |x: f64| bessel_j(nu, x);
    let center = mcmahon_estimate(nu, k);
    let mut lo = (center - 0.5 * PI).max(previous + 1e-9).max(1e-9);
    let mut hi = center + 0.5 * PI;
    let mut f_lo = f(lo)?;
    let mut f_hi = f(hi)?;

    if f_lo * f_hi > 0.0 {
        // Fallback: march from the previous zero until the sign changes.
        let step = PI / 16.0;
        let mut a = previous + 1e-6;
        let mut fa = f(a)?;
        let mut found = false;
        for _ in 0..64 {
            let b = a + step;
            let fb = f(b)?;
            if fa * fb <= 0.0 {
                lo = a;
                hi = b;
                f_lo = fa;
                f_hi = fb;
                found = true;
                break;
            }
            a = b;
            fa = fb;
        }
        if !found {
            return Err(Error::Bracket { nu, k });
        }
    }

    // Bisection to a narrow bracket, then Newton.
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_lo * f_mid < 0.0 {
            hi = mid;
            f_hi = f_mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    debug_assert!(f_lo * f_hi <= 0.0);

    // Safeguarded Newton: bisect whenever the step leaves the bracket.
    let mut z = 0.5 * (lo + hi);
    for _ in 0..40 {
        let value = f(z)?;
        if value == 0.0 {
            break;
        }
        if value * f_lo < 0.0 {
            hi = z;
        } else {
            lo = z;
            f_lo = value;
        }
        let slope = bessel_j_prime(nu, z)?;
        let newton = z - value / slope;
        let next = if newton >= lo && newton <= hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let moved = (next - z).abs();
        z = next;
        if moved <= 2.0 * f64::EPSILON * z {
            break;
        }
    }

    let residual = f(z)?.abs();
    if residual > ZERO_RESIDUAL_TOL {
        return Err(Error::Convergence {
            func: "bessel_j_zeros",
            x: z,
            terms: 20,
            target: ZERO_RESIDUAL_TOL,
        });
    }
    let delta = 1e-7 * z.max(1.0);
    if f(z - delta)? * f(z + delta)? > 0.0 {
        return Err(Error::Bracket { nu, k });
    }
    Ok(z)
}

/// One Newton step from `z`; used to check that tabulated zeros are fixed points.
pub fn newton_step(nu: f64, z: f64) -> Result<f64> {
    Ok(z - bessel_j(nu, z)? / bessel_j_prime(nu, z)?)
}

/// `mu = ((exponent + 2) / 2 * zero)^2`.
pub fn eigenvalue_mu(zero: f64, exponent: f64) -> Result<f64> {
    if !(zero > 0.0) || !(exponent > 0.0) || !zero.is_finite() || !exponent.is_finite() {
        return Err(Error::domain(
            "eigenvalue_mu",
            format!("zero = {zero} and exponent = {exponent} must both be positive"),
        ));
    }
    let scaled = 0.5 * (exponent + 2.0) * zero;
    Ok(scaled * scaled)
}
