//! Separated eigenmodes of the two degenerate problems.
//!
//! * Problem 1: `y^m u_xx - x^n u_y - lambda x^n y^m u = 0` on the unit square,
//!   `u(0, y) = u(1, y) = 0`, `u(x, 0) = alpha u(x, 1)` with real `alpha`.
//! * Problem 2: `x^n y^m u_t = y^m u_xx + x^n u_yy - lambda x^n y^m u` on the unit
//!   cube, `u = 0` on the four lateral faces, `u(x, y, 0) = alpha u(x, y, 1)`.
//!
//! The spatial factors are `X_k(x) = c x^(1/2) J_nu(z_k x^((n+2)/2))` with
//! `nu = 1/(n+2)` and `z_k` the k-th positive zero of `J_nu`, which solves
//! `X'' + mu x^n X = 0`, `X(0) = X(1) = 0` for `mu = ((n+2) z_k / 2)^2`.
//!
//! The temporal factor solves `T' + (lambda + mu) T = 0` with
//! `T(0) = alpha T(1)`, so `exp(lambda + mu) = alpha` and
//! `lambda = -mu + ln|alpha| + i (arg alpha + 2 pi s)`.
//!
//! [`Convention::Literal`] switches to an alternative set of formulas: the
//! `arctan(alpha2/alpha1) + s pi` branch, the `+mu` temporal exponent and the
//! `+mu` Problem-1 eigenvalue. They exist for comparison only: they do not
//! satisfy the non-local condition or the governing equation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::field::{Partials, SmoothField};
use crate::roots::{bessel_j_zero, eigenvalue_mu};
use crate::specfun::{bessel_i, bessel_j, ln_gamma};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Problem1,
    Problem2,
    Problem3,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "problem1" => Ok(Variant::Problem1),
            "problem2" => Ok(Variant::Problem2),
            "problem3" => Ok(Variant::Problem3),
            other => Err(Error::InvalidInput(format!(
                "unknown variant `{other}` (expected problem1, problem2 or problem3)"
            ))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Problem1 => "problem1",
            Variant::Problem2 => "problem2",
            Variant::Problem3 => "problem3",
        })
    }
}

/// Selects between the self-consistent formulas and the `Literal` alternatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    #[default]
    Consistent,
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    /// Degeneracy exponent in `y`.
    pub m: f64,
    /// Degeneracy exponent in `x`.
    pub n: f64,
    pub alpha: C64,
    pub lambda: C64,
    pub variant: Variant,
}

impl ProblemSpec {
    pub fn new(m: f64, n: f64, alpha: C64, lambda: C64, variant: Variant) -> Result<Self> {
        let spec = ProblemSpec {
            m,
            n,
            alpha,
            lambda,
            variant,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m.is_finite()) || !(self.n > 0.0 && self.n.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "degeneracy exponents must be positive, got m = {}, n = {}",
                self.m, self.n
            )));
        }
        if !(self.alpha.norm() > 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidInput(format!(
                "alpha must be a nonzero finite number, got {}",
                self.alpha
            )));
        }
        if !self.lambda.is_finite() {
            return Err(Error::InvalidInput("lambda must be finite".into()));
        }
        if self.variant == Variant::Problem1 && self.alpha.im != 0.0 {
            return Err(Error::InvalidInput(format!(
                "problem1 requires a real alpha, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    pub fn with_lambda(mut self, lambda: C64) -> Self {
        self.lambda = lambda;
        self
    }
}

/// One separated eigenmode.
///
/// For Problem 2, `k` and `p` index the spatial factors in `x` and `y` and `s`
/// the branch of the temporal exponent. For Problem 1, `p` is the parity index
/// of the `y` factor and `s` is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenMode {
    pub k: usize,
    pub p: usize,
    pub s: i64,
    pub mu1: f64,
    pub mu2: Option<f64>,
    pub mu: f64,
    pub lambda: C64,
    pub coeff: C64,
}

/// Kernel used by the spatial factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BesselKernel {
    #[default]
    J,
    /// The modified kernel `I_nu`. It has no positive zeros, so no `mu` makes
    /// the factor vanish at 1; kept for evaluating the alternative formula.
    ModifiedI,
}

/// `c x^(1/2) K_nu(z x^q)` with `nu = 1/(n+2)`, `q = (n+2)/2`,
/// `z = 2 sqrt(mu) / (n+2)` and `c = (2/(n+2))^nu mu^(nu/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselProfile {
    pub exponent: f64,
    pub nu: f64,
    pub mu: f64,
    pub kernel: BesselKernel,
    z: f64,
    q: f64,
    scale: f64,
}

impl BesselProfile {
    /// The k-th Dirichlet eigenfunction for the given degeneracy exponent.
    pub fn dirichlet(k: usize, exponent: f64) -> Result<Self> {
        if !(exponent > 0.0) {
            return Err(Error::InvalidInput(format!(
                "degeneracy exponent must be positive, got {exponent}"
            )));
        }
        let nu = 1.0 / (exponent + 2.0);
        let zero = bessel_j_zero(nu, k)?;
        let mu = eigenvalue_mu(zero, exponent)?;
        Self::with_kernel(BesselKernel::J, mu, exponent)
    }

    pub fn with_kernel(kernel: BesselKernel, mu: f64, exponent: f64) -> Result<Self> {
        if !(mu > 0.0) || !(exponent > 0.0) {
            return Err(Error::InvalidInput(format!(
                "profile needs mu > 0 and exponent > 0, got mu = {mu}, exponent = {exponent}"
            )));
        }
        let nu = 1.0 / (exponent + 2.0);
        let scale = (2.0 / (exponent + 2.0)).powf(nu) * mu.powf(0.5 * nu);
        Ok(BesselProfile {
            exponent,
            nu,
            mu,
            kernel,
            z: 2.0 * mu.sqrt() / (exponent + 2.0),
            q: 0.5 * (exponent + 2.0),
            scale,
        })
    }

    /// The scaled zero `z = 2 sqrt(mu) / (n + 2)`.
    pub fn zero(&self) -> f64 {
        self.z
    }

    fn kernel(&self, w: f64) -> (f64, f64) {
        let (value, upper, sign) = match self.kernel {
            BesselKernel::J => (bessel_j(self.nu, w), bessel_j(self.nu + 1.0, w), -1.0),
            BesselKernel::ModifiedI => (bessel_i(self.nu, w), bessel_i(self.nu + 1.0, w), 1.0),
        };
        let value = value.unwrap_or(f64::NAN);
        let upper = upper.unwrap_or(f64::NAN);
        // K' = (nu/w) K -/+ K_{nu+1}
        (value, self.nu / w * value + sign * upper)
    }

    pub fn value(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let w = self.z * x.powf(self.q);
        self.scale * x.sqrt() * self.kernel(w).0
    }

    /// Value, first and second derivative.
    ///
    /// The second derivative eliminates `K''` through Bessel's equation
    /// `w^2 K'' + w K' -/+ (w^2 -/+ nu^2) K = 0`.
    pub fn derivatives(&self, x: f64) -> (f64, f64, f64) {
        if x == 0.0 {
            // f ~ c (z/2)^nu / Gamma(nu + 1) * x near the origin.
            let slope = self.scale * (0.5 * self.z).powf(self.nu)
                / ln_gamma(self.nu + 1.0).map(f64::exp).unwrap_or(f64::NAN);
            return (0.0, slope, 0.0);
        }
        let q = self.q;
        let w = self.z * x.powf(q);
        let (k0, k1) = self.kernel(w);
        let k2 = match self.kernel {
            BesselKernel::J => -k1 / w - (1.0 - self.nu * self.nu / (w * w)) * k0,
            BesselKernel::ModifiedI => -k1 / w + (1.0 + self.nu * self.nu / (w * w)) * k0,
        };
        let sx = x.sqrt();
        let f = self.scale * sx * k0;
        let g = 0.5 * k0 + q * w * k1;
        let d1 = self.scale * g / sx;
        let dg = 0.5 * k1 + q * k1 + q * w * k2;
        let d2 = self.scale * (-0.5 * g + q * w * dg) / (x * sx);
        (f, d1, d2)
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidInput(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// `X_k(x)` for degeneracy exponent `n`, unit normalisation.
pub fn mode_x(k: usize, n: f64, x: f64) -> Result<f64> {
    check_unit("x", x)?;
    Ok(BesselProfile::dirichlet(k, n)?.value(x))
}

/// `Y_p(y)` for degeneracy exponent `m`, unit normalisation.
pub fn mode_y(p: usize, m: f64, y: f64) -> Result<f64> {
    check_unit("y", y)?;
    Ok(BesselProfile::dirichlet(p, m)?.value(y))
}

/// Eigenvalue of Problem 2 for Fourier constant `mu`.
pub fn lambda_problem2(mu: f64, alpha: C64, s: i64, convention: Convention) -> Result<C64> {
    if !(alpha.norm() > 0.0) {
        return Err(Error::InvalidInput("alpha must be nonzero".into()));
    }
    let re = -mu + alpha.norm().ln();
    let im = match convention {
        Convention::Consistent => alpha.arg() + 2.0 * PI * s as f64,
        Convention::Literal => (alpha.im / alpha.re).atan() + PI * s as f64,
    };
    Ok(C64::new(re, im))
}

/// Exponent `r` of `T(t) = coeff * exp(r t)`.
fn temporal_rate(mode: &EigenMode, alpha: C64, convention: Convention) -> C64 {
    match convention {
        Convention::Consistent => -(mode.lambda + mode.mu),
        Convention::Literal => C64::new(
            mode.mu - alpha.norm().ln(),
            -((alpha.im / alpha.re).atan() + PI * mode.s as f64),
        ),
    }
}

/// Temporal factor `T(t) = coeff * exp(-(lambda + mu) t)` of a Problem-2 mode.
pub fn mode_t(t: f64, mode: &EigenMode, alpha: C64, convention: Convention) -> C64 {
    mode.coeff * (temporal_rate(mode, alpha, convention) * t).exp()
}

impl EigenMode {
    pub fn problem2(
        k: usize,
        p: usize,
        s: i64,
        spec: &ProblemSpec,
        convention: Convention,
    ) -> Result<Self> {
        Ok(Problem2Mode::new(k, p, s, spec, convention)?.mode)
    }

    pub fn problem1(
        k: usize,
        p: usize,
        spec: &ProblemSpec,
        convention: Convention,
    ) -> Result<Self> {
        Ok(Problem1Mode::new(k, p, spec, convention)?.mode)
    }
}

/// A Problem-2 mode `u = X_k(x) Y_p(y) T(t)` ready for evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Problem2Mode {
    pub mode: EigenMode,
    pub x: BesselProfile,
    pub y: BesselProfile,
    pub alpha: C64,
    pub convention: Convention,
}

impl Problem2Mode {
    pub fn new(
        k: usize,
        p: usize,
        s: i64,
        spec: &ProblemSpec,
        convention: Convention,
    ) -> Result<Self> {
        spec.validate()?;
        if spec.variant != Variant::Problem2 {
            return Err(Error::InvalidInput(format!(
                "expected a problem2 spec, got {}",
                spec.variant
            )));
        }
        let x = BesselProfile::dirichlet(k, spec.n)?;
        let y = BesselProfile::dirichlet(p, spec.m)?;
        let mu = x.mu + y.mu;
        let lambda = lambda_problem2(mu, spec.alpha, s, convention)?;
        Ok(Problem2Mode {
            mode: EigenMode {
                k,
                p,
                s,
                mu1: x.mu,
                mu2: Some(y.mu),
                mu,
                lambda,
                coeff: C64::new(1.0, 0.0),
            },
            x,
            y,
            alpha: spec.alpha,
            convention,
        })
    }

    pub fn with_coeff(mut self, coeff: C64) -> Self {
        self.mode.coeff = coeff;
        self
    }

    /// The [`ProblemSpec`] this mode solves, with its own eigenvalue.
    pub fn spec(&self) -> ProblemSpec {
        ProblemSpec {
            m: self.y.exponent,
            n: self.x.exponent,
            alpha: self.alpha,
            lambda: self.mode.lambda,
            variant: Variant::Problem2,
        }
    }

    pub fn temporal(&self, t: f64) -> C64 {
        mode_t(t, &self.mode, self.alpha, self.convention)
    }
}

impl SmoothField for Problem2Mode {
    fn value(&self, x: f64, y: f64, t: f64) -> C64 {
        self.temporal(t) * (self.x.value(x) * self.y.value(y))
    }

    fn partials(&self, x: f64, y: f64, t: f64) -> Option<Partials> {
        let (fx, dx, ddx) = self.x.derivatives(x);
        let (fy, dy, ddy) = self.y.derivatives(y);
        let time = self.temporal(t);
        let rate = temporal_rate(&self.mode, self.alpha, self.convention);
        Some(Partials {
            u: time * (fx * fy),
            ux: time * (dx * fy),
            uy: time * (fx * dy),
            ut: time * rate * (fx * fy),
            uxx: time * (ddx * fy),
            uyy: time * (fx * ddy),
        })
    }
}

/// `u_kp(x, y, t)` of Problem 2 with unit normalisation.
pub fn mode_problem2(
    x: f64,
    y: f64,
    t: f64,
    k: usize,
    p: usize,
    s: i64,
    spec: &ProblemSpec,
) -> Result<C64> {
    check_unit("x", x)?;
    check_unit("y", y)?;
    check_unit("t", t)?;
    Ok(Problem2Mode::new(k, p, s, spec, Convention::Consistent)?.value(x, y, t))
}

/// Eigenvalue of Problem 1: `-mu + (m+1) ln|alpha| + i (m+1) p pi`.
///
/// Requires `(-1)^p = sign(alpha)`.
pub fn lambda_problem1(
    mu: f64,
    alpha: f64,
    p: usize,
    m: f64,
    convention: Convention,
) -> Result<C64> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::InvalidInput("alpha must be a nonzero real".into()));
    }
    let parity_ok = p.is_multiple_of(2) == (alpha > 0.0);
    if !parity_ok {
        return Err(Error::Parity { p: p as u32, alpha });
    }
    let sign = match convention {
        Convention::Consistent => -1.0,
        Convention::Literal => 1.0,
    };
    Ok(C64::new(
        sign * mu + (m + 1.0) * alpha.abs().ln(),
        (m + 1.0) * p as f64 * PI,
    ))
}

/// A Problem-1 mode `u = X_k(x) exp((-ln|alpha| - i p pi) y^(m+1))`.
///
/// The `y` factor does not depend on the eigenvalue, so evaluating the
/// governing equation with `mode.lambda` tests the eigenvalue formula.
#[derive(Debug, Clone, Copy)]
pub struct Problem1Mode {
    pub mode: EigenMode,
    pub x: BesselProfile,
    pub m: f64,
    pub alpha: f64,
}

impl Problem1Mode {
    pub fn new(k: usize, p: usize, spec: &ProblemSpec, convention: Convention) -> Result<Self> {
        Self::with_kernel(k, p, spec, convention, BesselKernel::J)
    }

    /// With [`BesselKernel::ModifiedI`] the profile uses the same `mu_k` as the
    /// `J` kernel; it does not vanish at `x = 1`.
    pub fn with_kernel(
        k: usize,
        p: usize,
        spec: &ProblemSpec,
        convention: Convention,
        kernel: BesselKernel,
    ) -> Result<Self> {
        spec.validate()?;
        if spec.variant != Variant::Problem1 {
            return Err(Error::InvalidInput(format!(
                "expected a problem1 spec, got {}",
                spec.variant
            )));
        }
        let dirichlet = BesselProfile::dirichlet(k, spec.n)?;
        let x = BesselProfile::with_kernel(kernel, dirichlet.mu, spec.n)?;
        let alpha = spec.alpha.re;
        let lambda = lambda_problem1(x.mu, alpha, p, spec.m, convention)?;
        Ok(Problem1Mode {
            mode: EigenMode {
                k,
                p,
                s: 0,
                mu1: x.mu,
                mu2: None,
                mu: x.mu,
                lambda,
                coeff: C64::new(1.0, 0.0),
            },
            x,
            m: spec.m,
            alpha,
        })
    }

    /// `-ln|alpha| - i p pi`.
    fn rate(&self) -> C64 {
        C64::new(-self.alpha.abs().ln(), -(self.mode.p as f64) * PI)
    }

    fn temporal(&self, y: f64) -> C64 {
        self.mode.coeff * (self.rate() * y.powf(self.m + 1.0)).exp()
    }

    /// The [`ProblemSpec`] this mode solves, with its own eigenvalue.
    pub fn spec(&self) -> ProblemSpec {
        ProblemSpec {
            m: self.m,
            n: self.x.exponent,
            alpha: C64::new(self.alpha, 0.0),
            lambda: self.mode.lambda,
            variant: Variant::Problem1,
        }
    }
}

impl SmoothField for Problem1Mode {
    fn value(&self, x: f64, y: f64, _t: f64) -> C64 {
        self.temporal(y) * self.x.value(x)
    }

    fn partials(&self, x: f64, y: f64, _t: f64) -> Option<Partials> {
        let (f, d1, d2) = self.x.derivatives(x);
        let psi = self.temporal(y);
        let dpsi = psi * self.rate() * ((self.m + 1.0) * y.powf(self.m));
        Some(Partials {
            u: psi * f,
            ux: psi * d1,
            uy: dpsi * f,
            ut: C64::new(0.0, 0.0),
            uxx: psi * d2,
            uyy: C64::new(0.0, 0.0),
        })
    }
}

/// `u_pk(x, y)` of Problem 1 with unit normalisation and the `J` kernel.
pub fn mode_problem1(x: f64, y: f64, k: usize, p: usize, spec: &ProblemSpec) -> Result<C64> {
    check_unit("x", x)?;
    check_unit("y", y)?;
    Ok(Problem1Mode::new(k, p, spec, Convention::Consistent)?.value(x, y, 0.0))
}

/// Outcome of checking a spec against the sufficient uniqueness conditions
/// for its problem variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub variant: Variant,
    pub guaranteed: bool,
    /// Clauses that do not hold, in the order they are stated.
    pub violated: Vec<String>,
}

fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Checks the sufficient conditions under which a solution is unique.
///
/// * problem1: `alpha` real in `[-1, 0) U (0, 1]` and `Re lambda >= 0`;
/// * problem2: `alpha1^2 + alpha2^2 < 1` and `lambda1 >= 0`;
/// * problem3: `|alpha| = 1`, real `lambda > 0`, `k3 k5 = k2 k6`,
///   `k1 k2 < 0` and `k4 k5 > 0`.
///
/// `k_coeffs` must be given exactly when the variant is problem3.
pub fn check_uniqueness_conditions(
    spec: &ProblemSpec,
    k_coeffs: Option<[f64; 6]>,
) -> Result<UniquenessReport> {
    let mut violated = Vec::new();
    let mut clause = |ok: bool, text: &str| {
        if !ok {
            violated.push(text.to_string());
        }
    };
    let alpha = spec.alpha;
    let lambda = spec.lambda;
    match (spec.variant, k_coeffs) {
        (Variant::Problem1, None) => {
            let real = alpha.im == 0.0;
            clause(real, "alpha is real");
            let a = alpha.re;
            clause(
                real && a != 0.0 && (-1.0..=1.0).contains(&a),
                "alpha in [-1, 0) U (0, 1]",
            );
            clause(lambda.re >= 0.0, "Re lambda >= 0");
        }
        (Variant::Problem2, None) => {
            clause(alpha.norm_sqr() < 1.0, "alpha1^2 + alpha2^2 < 1");
            clause(lambda.re >= 0.0, "lambda1 >= 0");
        }
        (Variant::Problem3, Some(k)) => {
            clause(approx_eq(alpha.norm(), 1.0), "|alpha| = 1");
            clause(lambda.im == 0.0 && lambda.re > 0.0, "lambda > 0");
            clause(approx_eq(k[2] * k[4], k[1] * k[5]), "k3*k5 = k2*k6");
            clause(k[0] * k[1] < 0.0, "k1*k2 < 0");
            clause(k[3] * k[4] > 0.0, "k4*k5 > 0");
        }
        (Variant::Problem3, None) => {
            return Err(Error::InvalidInput(
                "problem3 requires the six coupling coefficients".into(),
            ))
        }
        (variant, Some(_)) => {
            return Err(Error::InvalidInput(format!(
                "coupling coefficients only apply to problem3, not {variant}"
            )))
        }
    }
    Ok(UniquenessReport {
        variant: spec.variant,
        guaranteed: violated.is_empty(),
        violated,
    })
}
