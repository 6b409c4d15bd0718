//! Numerical core for parabolic problems with non-local initial conditions
//! `u(., 0) = alpha u(., 1)`:
//!
//! * the degenerate problems `y^m u_xx - x^n u_y = lambda x^n y^m u` and
//!   `x^n y^m u_t = y^m u_xx + x^n u_yy - lambda x^n y^m u` on the unit square
//!   and cube, solved mode by mode through Bessel functions of fractional order;
//! * the forward-backward transmission problem `u_xx - sign(x) u_y = lambda u`
//!   on `[-1, 1] x [0, 1]`, whose admissible `lambda` are the zeros of a 4x4
//!   dispersion determinant.
//!
//! Independent checks live beside the closed forms: energy identities by
//! quadrature, pointwise residuals, and an implicit finite-difference solver.

// `!(v > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dispersion;
pub mod energy;
mod error;
pub mod field;
pub mod modes;
pub mod oracle;
pub mod quadrature;
pub mod roots;
pub mod specfun;

pub use error::{Error, Result};
pub use field::{Partials, SmoothField};

pub type C64 = num_complex::Complex64;
