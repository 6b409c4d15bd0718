//! Energy identities for the degenerate and forward-backward problems.
//!
//! Multiplying `x^n y^m u_t = y^m u_xx + x^n u_yy - lambda x^n y^m u` by
//! `conj(u)`, taking real parts and integrating over the unit cube gives
//!
//! ```text
//!   surface integral of Re[y^m conj(u) u_x nu_x + x^n conj(u) u_y nu_y - 1/2 x^n y^m |u|^2 nu_t]
//!     = volume integral of (y^m |u_x|^2 + x^n |u_y|^2 + lambda_1 x^n y^m |u|^2)
//! ```
//!
//! for every solution. For an arbitrary smooth `u` the two sides differ by
//! `-volume integral of Re[conj(u) (x^n y^m u_t - y^m u_xx - x^n u_yy + lambda x^n y^m u)]`,
//! which [`green_residual_problem2`] evaluates through second derivatives.
//!
//! With the lateral faces zero and `u(., 0) = alpha u(., 1)` the identity
//! collapses to the functional of [`energy_functional_problem2`].
//!
//! Accuracy model: Gauss nodes are interior, so the weights `x^n`, `y^m` are
//! never evaluated at zero. For integer exponents the integrands of the modes
//! are analytic and the quadrature converges spectrally; a fractional exponent
//! `a` limits convergence to `O(order^-(2a + 2))`.

use serde::{Deserialize, Serialize};

use crate::field::partials_or_fd;
use crate::modes::{Convention, ProblemSpec, Variant};
use crate::quadrature::GaussLegendre;
use crate::{Error, Result, SmoothField, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub value: f64,
}

impl Term {
    fn new(name: &str, value: f64) -> Self {
        Term {
            name: name.to_string(),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub surface_terms: f64,
    pub volume_terms: f64,
    /// `|surface_terms - volume_terms|`.
    pub defect: f64,
    pub quad_order: usize,
    pub tolerance: f64,
    /// Six face integrals followed by the three volume integrals.
    pub terms: Vec<Term>,
}

impl IdentityReport {
    pub fn signed_defect(&self) -> f64 {
        self.surface_terms - self.volume_terms
    }

    pub fn holds(&self) -> bool {
        self.defect <= self.tolerance
    }
}

const UNIT: (f64, f64) = (0.0, 1.0);
const LO: [f64; 3] = [0.0; 3];
const HI: [f64; 3] = [1.0; 3];

fn is_integer(v: f64) -> bool {
    (v - v.round()).abs() < 1e-12
}

/// Quadrature error model `order^-(2a + 2)` for the smallest fractional
/// exponent `a`, or the spectral floor when both exponents are integers.
pub fn quadrature_tolerance(spec: &ProblemSpec, quad_order: usize, magnitude: f64) -> f64 {
    let fractional = [spec.m, spec.n]
        .into_iter()
        .filter(|v| !is_integer(*v))
        .fold(f64::INFINITY, f64::min);
    let model = if fractional.is_finite() {
        (quad_order as f64).powf(-(2.0 * fractional + 2.0))
    } else {
        0.0
    };
    model.max(1e-8) * magnitude.max(1.0)
}

fn require_problem2(spec: &ProblemSpec) -> Result<()> {
    spec.validate()?;
    if spec.variant != Variant::Problem2 {
        return Err(Error::InvalidInput(format!(
            "expected a problem2 spec, got {}",
            spec.variant
        )));
    }
    Ok(())
}

/// Both sides of the energy identity for a candidate `u` of Problem 2.
pub fn energy_identity_problem2<F: SmoothField + ?Sized>(
    u: &F,
    spec: &ProblemSpec,
    quad_order: usize,
) -> Result<IdentityReport> {
    require_problem2(spec)?;
    let rule = GaussLegendre::new(quad_order)?;
    let (m, n) = (spec.m, spec.n);
    let d = |x: f64, y: f64, t: f64| partials_or_fd(u, [x, y, t], LO, HI);
    let re_conj = |a: C64, b: C64| (a.conj() * b).re;

    let s1 = rule.integrate_2d(UNIT, UNIT, |x, y| {
        0.5 * x.powf(n) * y.powf(m) * u.value(x, y, 0.0).norm_sqr()
    });
    let s6 = -rule.integrate_2d(UNIT, UNIT, |x, y| {
        0.5 * x.powf(n) * y.powf(m) * u.value(x, y, 1.0).norm_sqr()
    });
    let s2 = rule.integrate_2d(UNIT, UNIT, |y, t| {
        let p = d(1.0, y, t);
        y.powf(m) * re_conj(p.u, p.ux)
    });
    let s4 = -rule.integrate_2d(UNIT, UNIT, |y, t| {
        let p = d(0.0, y, t);
        y.powf(m) * re_conj(p.u, p.ux)
    });
    let s3 = -rule.integrate_2d(UNIT, UNIT, |x, t| {
        let p = d(x, 0.0, t);
        x.powf(n) * re_conj(p.u, p.uy)
    });
    let s5 = rule.integrate_2d(UNIT, UNIT, |x, t| {
        let p = d(x, 1.0, t);
        x.powf(n) * re_conj(p.u, p.uy)
    });

    let (mut vx, mut vy, mut vl) = (0.0, 0.0, 0.0);
    let lambda1 = spec.lambda.re;
    for (x, wx) in rule.mapped(0.0, 1.0) {
        let xn = x.powf(n);
        for (y, wy) in rule.mapped(0.0, 1.0) {
            let ym = y.powf(m);
            for (t, wt) in rule.mapped(0.0, 1.0) {
                let p = d(x, y, t);
                let w = wx * wy * wt;
                vx += w * ym * p.ux.norm_sqr();
                vy += w * xn * p.uy.norm_sqr();
                vl += w * lambda1 * xn * ym * p.u.norm_sqr();
            }
        }
    }

    let surface = s1 + s2 + s3 + s4 + s5 + s6;
    let volume = vx + vy + vl;
    let magnitude = [s1, s2, s3, s4, s5, s6, vx, vy, vl]
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    Ok(IdentityReport {
        surface_terms: surface,
        volume_terms: volume,
        defect: (surface - volume).abs(),
        quad_order,
        tolerance: quadrature_tolerance(spec, quad_order, magnitude),
        terms: vec![
            Term::new("face_t0", s1),
            Term::new("face_x1", s2),
            Term::new("face_y0", s3),
            Term::new("face_x0", s4),
            Term::new("face_y1", s5),
            Term::new("face_t1", s6),
            Term::new("volume_ux", vx),
            Term::new("volume_uy", vy),
            Term::new("volume_lambda", vl),
        ],
    })
}

/// `volume integral of Re[conj(u) (x^n y^m u_t - y^m u_xx - x^n u_yy + lambda x^n y^m u)]`.
///
/// Uses second derivatives only; shares no code with the face integrals of
/// [`energy_identity_problem2`].
pub fn green_residual_problem2<F: SmoothField + ?Sized>(
    u: &F,
    spec: &ProblemSpec,
    quad_order: usize,
) -> Result<f64> {
    require_problem2(spec)?;
    let rule = GaussLegendre::new(quad_order)?;
    let (m, n, lambda) = (spec.m, spec.n, spec.lambda);
    Ok(rule.integrate_3d(UNIT, UNIT, UNIT, |x, y, t| {
        let p = partials_or_fd(u, [x, y, t], LO, HI);
        let (xn, ym) = (x.powf(n), y.powf(m));
        let op = p.ut * (xn * ym) - p.uxx * ym - p.uyy * xn + lambda * (xn * ym) * p.u;
        (p.u.conj() * op).re
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub value: f64,
    pub terms: Vec<Term>,
    pub quad_order: usize,
    /// Sample points where the input fails the lateral or non-local conditions.
    pub warnings: Vec<String>,
}

/// Uniqueness functional of Problem 2:
/// `1/2 (1 - |alpha|^2) integral of x^n y^m |u(x, y, 1)|^2
///  + volume integral of (y^m |u_x|^2 + x^n |u_y|^2 + lambda_1 x^n y^m |u|^2)`.
///
/// Zero for every solution; positive for nonzero `u` when `|alpha| < 1` and
/// `lambda_1 >= 0`.
pub fn energy_functional_problem2<F: SmoothField + ?Sized>(
    u: &F,
    spec: &ProblemSpec,
    quad_order: usize,
) -> Result<FunctionalReport> {
    energy_functional_problem2_with(u, spec, quad_order, Convention::Consistent)
}

/// As [`energy_functional_problem2`]; [`Convention::Literal`] uses `|u|` in
/// place of `|u|^2` in the terminal and `lambda_1` terms.
pub fn energy_functional_problem2_with<F: SmoothField + ?Sized>(
    u: &F,
    spec: &ProblemSpec,
    quad_order: usize,
    convention: Convention,
) -> Result<FunctionalReport> {
    require_problem2(spec)?;
    let rule = GaussLegendre::new(quad_order)?;
    let (m, n) = (spec.m, spec.n);
    let lambda1 = spec.lambda.re;
    let amplitude = |v: C64| match convention {
        Convention::Consistent => v.norm_sqr(),
        Convention::Literal => v.norm(),
    };

    let terminal = 0.5
        * (1.0 - spec.alpha.norm_sqr())
        * rule.integrate_2d(UNIT, UNIT, |x, y| {
            x.powf(n) * y.powf(m) * amplitude(u.value(x, y, 1.0))
        });
    let (mut vx, mut vy, mut vl) = (0.0, 0.0, 0.0);
    for (x, wx) in rule.mapped(0.0, 1.0) {
        let xn = x.powf(n);
        for (y, wy) in rule.mapped(0.0, 1.0) {
            let ym = y.powf(m);
            for (t, wt) in rule.mapped(0.0, 1.0) {
                let p = partials_or_fd(u, [x, y, t], LO, HI);
                let w = wx * wy * wt;
                vx += w * ym * p.ux.norm_sqr();
                vy += w * xn * p.uy.norm_sqr();
                vl += w * lambda1 * xn * ym * amplitude(p.u);
            }
        }
    }

    Ok(FunctionalReport {
        value: terminal + vx + vy + vl,
        terms: vec![
            Term::new("terminal", terminal),
            Term::new("volume_ux", vx),
            Term::new("volume_uy", vy),
            Term::new("volume_lambda", vl),
        ],
        quad_order,
        warnings: precheck_problem2(u, spec),
    })
}

/// Samples the lateral faces and the non-local condition on a 5 x 5 grid.
fn precheck_problem2<F: SmoothField + ?Sized>(u: &F, spec: &ProblemSpec) -> Vec<String> {
    const TOL: f64 = 1e-8;
    let samples = [0.1, 0.3, 0.5, 0.7, 0.9];
    let mut scale = 0.0f64;
    for &a in &samples {
        for &b in &samples {
            for &c in &samples {
                scale = scale.max(u.value(a, b, c).norm());
            }
        }
    }
    let limit = TOL * scale.max(1.0);
    let mut warnings = Vec::new();
    for &a in &samples {
        for &b in &samples {
            let faces = [
                ("x = 0", u.value(0.0, a, b)),
                ("x = 1", u.value(1.0, a, b)),
                ("y = 0", u.value(a, 0.0, b)),
                ("y = 1", u.value(a, 1.0, b)),
            ];
            for (face, v) in faces {
                if v.norm() > limit {
                    warnings.push(format!("u = {v:.3e} on face {face} at ({a}, {b})"));
                }
            }
            let nonlocal = u.value(a, b, 0.0) - spec.alpha * u.value(a, b, 1.0);
            if nonlocal.norm() > limit {
                warnings.push(format!(
                    "u(x, y, 0) - alpha u(x, y, 1) = {nonlocal:.3e} at ({a}, {b})"
                ));
            }
        }
    }
    warnings
}

/// A real field on `[-1, 1] x [0, 1]` returning `(u, u_x)`.
pub trait TransmissionField {
    fn value_and_dx(&self, x: f64, y: f64) -> (f64, f64);
}

impl<F: Fn(f64, f64) -> (f64, f64)> TransmissionField for F {
    fn value_and_dx(&self, x: f64, y: f64) -> (f64, f64) {
        self(x, y)
    }
}

/// The functional that the uniqueness argument for the forward-backward
/// problem sets to zero for solutions:
///
/// ```text
///   int_{-1}^0 (alpha^2 - 1)/2 u^2(x, 1) dx + int_0^1 (1 - alpha^2)/2 u^2(x, 1) dx
/// + int_0^1 [(k4/k5) u_x^2(1, y) - (k1/k2) u_x^2(-1, y)] dy
/// + int_0^1 (k3/k2 - k6/k5) u_x(-1, y) u_x(1, y) dy
/// + int_D1 (u_x^2 + lambda u^2) + int_D2 (u_x^2 + lambda u^2)
/// ```
///
/// The cross term multiplies `u_x(-1, y)`, which is what substituting the
/// coupling conditions into `u u_x` at `x = -1` produces; with
/// [`Convention::Literal`] it multiplies `u(-1, y)` instead.
pub fn energy_functional_problem3<F: TransmissionField + ?Sized>(
    u: &F,
    k: [f64; 6],
    alpha: f64,
    lambda: f64,
    quad_order: usize,
) -> Result<FunctionalReport> {
    energy_functional_problem3_with(u, k, alpha, lambda, quad_order, Convention::Consistent)
}

pub fn energy_functional_problem3_with<F: TransmissionField + ?Sized>(
    u: &F,
    k: [f64; 6],
    alpha: f64,
    lambda: f64,
    quad_order: usize,
    convention: Convention,
) -> Result<FunctionalReport> {
    let [k1, k2, k3, k4, k5, k6] = k;
    if k2 == 0.0 || k5 == 0.0 {
        return Err(Error::InvalidInput(format!(
            "k2 and k5 must be nonzero, got k2 = {k2}, k5 = {k5}"
        )));
    }
    let rule = GaussLegendre::new(quad_order)?;
    let half = 0.5 * (alpha * alpha - 1.0);
    let left = rule.integrate(-1.0, 0.0, |x| half * u.value_and_dx(x, 1.0).0.powi(2));
    let right = rule.integrate(0.0, 1.0, |x| -half * u.value_and_dx(x, 1.0).0.powi(2));
    let flux = rule.integrate(0.0, 1.0, |y| {
        let (_, dr) = u.value_and_dx(1.0, y);
        let (_, dl) = u.value_and_dx(-1.0, y);
        k4 / k5 * dr * dr - k1 / k2 * dl * dl
    });
    let cross_coeff = k3 / k2 - k6 / k5;
    let cross = rule.integrate(0.0, 1.0, |y| {
        let (ul, dl) = u.value_and_dx(-1.0, y);
        let (_, dr) = u.value_and_dx(1.0, y);
        let left_factor = match convention {
            Convention::Consistent => dl,
            Convention::Literal => ul,
        };
        cross_coeff * left_factor * dr
    });
    let density = |x: f64, y: f64| {
        let (v, d) = u.value_and_dx(x, y);
        d * d + lambda * v * v
    };
    let volume_left = rule.integrate_2d((-1.0, 0.0), UNIT, density);
    let volume_right = rule.integrate_2d(UNIT, UNIT, density);
    let terms = vec![
        Term::new("terminal_left", left),
        Term::new("terminal_right", right),
        Term::new("flux", flux),
        Term::new("cross", cross),
        Term::new("volume_left", volume_left),
        Term::new("volume_right", volume_right),
    ];
    Ok(FunctionalReport {
        value: terms.iter().map(|t| t.value).sum(),
        terms,
        quad_order,
        warnings: Vec::new(),
    })
}
