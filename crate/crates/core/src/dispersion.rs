//! Separated modes `u = exp(sigma y) phi(x)` of the forward-backward problem
//!
//! ```text
//!   u_xx - sign(x) u_y = lambda u                on [-1, 1] x [0, 1]
//!   k1 u_x(-1, y) + k2 u(-1, y) = k3 u_x(1, y)
//!   k4 u_x(1, y) + k5 u(1, y) = k6 u_x(-1, y)
//!   u(x, 0) = alpha u(x, 1)
//! ```
//!
//! The last condition fixes `exp(sigma) alpha = 1`. On each half `phi`
//! solves `phi'' = w^2 phi` with `w+^2 = lambda + sigma` (x > 0) and
//! `w-^2 = lambda - sigma` (x < 0). Each half is expanded in
//! `{cosh(w x), sinh(w x) / w}`; both are entire in `w^2`, so the determinant
//! needs no square-root branch and the coincident case `w = 0` reduces to
//! `{1, x}` without special handling. Relative to the exponential basis
//! `{exp(w x), exp(-w x)}` the determinant differs by the factor `4 w+ w-`.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

const ONE: C64 = C64::new(1.0, 0.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Largest normalised `|det|` accepted for a refined root.
pub const ROOT_TOL: f64 = 1e-9;
/// Distance below which two refined roots are merged.
pub const DEDUP_TOL: f64 = 1e-6;
/// Largest relative residual accepted by [`verify_candidate`].
pub const VERIFY_TOL: f64 = 1e-7;
/// Most samples per axis in a scan.
pub const MAX_DENSITY: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionProblem {
    /// `[k1, k2, k3, k4, k5, k6]`.
    pub k: [f64; 6],
    pub alpha: f64,
    pub s: i64,
}

impl TransmissionProblem {
    pub fn new(k: [f64; 6], alpha: f64, s: i64) -> Result<Self> {
        let problem = TransmissionProblem { k, alpha, s };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha != 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "alpha must be nonzero, got {}",
                self.alpha
            )));
        }
        if self.k.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "coupling coefficients must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn sigma(&self) -> C64 {
        sigma_branch(C64::new(self.alpha, 0.0), self.s)
    }
}

/// `sigma = -Log(alpha) + 2 pi i s`, so that `exp(sigma) alpha = 1`.
pub fn sigma_branch(alpha: C64, s: i64) -> C64 {
    // `+ 0.0` maps a negative zero imaginary part to the upper branch.
    let alpha = C64::new(alpha.re, alpha.im + 0.0);
    -alpha.ln() + C64::new(0.0, 2.0 * std::f64::consts::PI * s as f64)
}

/// `(cosh w, sinh(w) / w)` as functions of `w^2`.
fn cosh_sinhc(w2: C64) -> (C64, C64) {
    if w2.norm() < 1e-6 {
        // Truncation error below w^6 / 5040.
        let ch = ONE + w2 / 2.0 + w2 * w2 / 24.0;
        let sh = ONE + w2 / 6.0 + w2 * w2 / 120.0;
        return (ch, sh);
    }
    let w = w2.sqrt();
    (w.cosh(), w.sinh() / w)
}

/// `phi` and `phi'` at `x` on one half, with `phi = c cosh(w x) + s sinh(w x) / w`.
fn half_profile(w2: C64, c: C64, s: C64, x: f64) -> (C64, C64) {
    let (ch, sh) = cosh_sinhc(w2 * (x * x));
    let value = c * ch + s * sh * x;
    let slope = c * w2 * sh * x + s * ch;
    (value, slope)
}

/// The 4 x 4 system for the coefficients `[c+, s+, c-, s-]`.
///
/// Rows: continuity of `phi` and `phi'` at 0, then the two couplings.
pub fn dispersion_matrix(lambda: C64, problem: &TransmissionProblem) -> Matrix4<C64> {
    let [k1, k2, k3, k4, k5, k6] = problem.k;
    let sigma = problem.sigma();
    let (wp2, wm2) = (lambda + sigma, lambda - sigma);
    let (chp, shp) = cosh_sinhc(wp2);
    let (chm, shm) = cosh_sinhc(wm2);
    // phi(1) = c+ ch+ + s+ sh+,  phi'(1) = c+ w+^2 sh+ + s+ ch+,
    // phi(-1) = c- ch- - s- sh-, phi'(-1) = -c- w-^2 sh- + s- ch-.
    Matrix4::new(
        ONE,
        ZERO,
        -ONE,
        ZERO,
        ZERO,
        ONE,
        ZERO,
        -ONE,
        -k3 * wp2 * shp,
        -k3 * chp,
        -k1 * wm2 * shm + k2 * chm,
        k1 * chm - k2 * shm,
        k4 * wp2 * shp + k5 * chp,
        k4 * chp + k5 * shp,
        k6 * wm2 * shm,
        -k6 * chm,
    )
}

pub fn dispersion_determinant(lambda: C64, problem: &TransmissionProblem) -> C64 {
    dispersion_matrix(lambda, problem).determinant()
}

/// `|det M| / prod_i ||row_i||`, which lies in `[0, 1]` by Hadamard's bound.
pub fn normalized_determinant(lambda: C64, problem: &TransmissionProblem) -> f64 {
    let m = dispersion_matrix(lambda, problem);
    let scale: f64 = m.row_iter().map(|r| r.norm()).product();
    if scale == 0.0 {
        return 0.0;
    }
    m.determinant().norm() / scale
}

/// Closed axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Region {
    pub fn real_segment(lo: f64, hi: f64) -> Self {
        Region {
            re: (lo, hi),
            im: (0.0, 0.0),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = [self.re.0, self.re.1, self.im.0, self.im.1]
            .iter()
            .all(|v| v.is_finite())
            && self.re.0 <= self.re.1
            && self.im.0 <= self.im.1;
        if !ok {
            return Err(Error::InvalidInput(format!(
                "region {self:?} is not a bounded rectangle"
            )));
        }
        Ok(())
    }

    pub fn contains(&self, z: C64) -> bool {
        let tol = 1e-9 * (1.0 + z.norm());
        z.re >= self.re.0 - tol
            && z.re <= self.re.1 + tol
            && z.im >= self.im.0 - tol
            && z.im <= self.im.1 + tol
    }

    /// `count` equispaced samples of `[lo, hi]` including both ends; the
    /// midpoint when `count == 1`.
    fn axis(range: (f64, f64), count: usize) -> Vec<f64> {
        if count == 1 || range.0 == range.1 {
            return vec![0.5 * (range.0 + range.1); count];
        }
        (0..count)
            .map(|i| range.0 + (range.1 - range.0) * i as f64 / (count - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub lambda: C64,
    /// Normalised determinant at the refined root.
    pub abs_det: f64,
    pub verification: VerificationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionScan {
    pub region: Region,
    pub re_samples: Vec<f64>,
    pub im_samples: Vec<f64>,
    /// Normalised `|det|`, indexed `[im][re]`.
    pub samples: Vec<Vec<f64>>,
    pub min_abs_det: f64,
    pub seeds: usize,
    /// Seeds whose Newton iteration stalled, diverged or left the region.
    pub newton_failures: Vec<String>,
    pub candidates: Vec<Candidate>,
}

/// Samples below this normalised `|det|` are refined when they are local minima.
pub const SEED_THRESHOLD: f64 = 1e-2;

/// Samples the normalised determinant on a `density.0 x density.1` grid and
/// refines its local minima by damped Newton.
pub fn scan_roots(
    region: Region,
    density: (usize, usize),
    problem: &TransmissionProblem,
) -> Result<DispersionScan> {
    region.validate()?;
    problem.validate()?;
    let (n_re, n_im) = density;
    if n_re == 0 || n_im == 0 || n_re > MAX_DENSITY || n_im > MAX_DENSITY {
        return Err(Error::InvalidInput(format!(
            "scan density must lie in 1..={MAX_DENSITY} per axis, got {n_re} x {n_im}"
        )));
    }
    let re_samples = Region::axis(region.re, n_re);
    let im_samples = Region::axis(region.im, n_im);
    let samples: Vec<Vec<f64>> = im_samples
        .iter()
        .map(|&im| {
            re_samples
                .iter()
                .map(|&re| normalized_determinant(C64::new(re, im), problem))
                .collect()
        })
        .collect();
    let min_abs_det = samples
        .iter()
        .flatten()
        .fold(f64::INFINITY, |a, b| a.min(*b));

    let mut seeds = Vec::new();
    for (j, row) in samples.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            if v > SEED_THRESHOLD {
                continue;
            }
            let mut is_min = true;
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let (jj, ii) = (j as i64 + dj, i as i64 + di);
                    if (dj, di) == (0, 0)
                        || jj < 0
                        || ii < 0
                        || jj >= n_im as i64
                        || ii >= n_re as i64
                    {
                        continue;
                    }
                    if samples[jj as usize][ii as usize] < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                seeds.push(C64::new(re_samples[i], im_samples[j]));
            }
        }
    }

    let mut newton_failures = Vec::new();
    let mut roots: Vec<C64> = Vec::new();
    for &seed in &seeds {
        match refine_root(seed, problem) {
            Ok(root) if !region.contains(root) => {
                newton_failures.push(format!(
                    "seed {seed} converged to {root} outside the region"
                ));
            }
            Ok(root) => {
                if roots.iter().all(|r| (r - root).norm() >= DEDUP_TOL) {
                    roots.push(root);
                }
            }
            Err(e) => newton_failures.push(format!("seed {seed}: {e}")),
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let candidates = roots
        .into_iter()
        .map(|lambda| Candidate {
            lambda,
            abs_det: normalized_determinant(lambda, problem),
            verification: verify_candidate(lambda, problem),
        })
        .collect();

    Ok(DispersionScan {
        region,
        re_samples,
        im_samples,
        samples,
        min_abs_det,
        seeds: seeds.len(),
        newton_failures,
        candidates,
    })
}

/// Damped Newton on the raw determinant with a central-difference slope.
pub fn refine_root(seed: C64, problem: &TransmissionProblem) -> Result<C64> {
    let f = |z: C64| dispersion_determinant(z, problem);
    let mut z = seed;
    let mut fz = f(z);
    for _ in 0..100 {
        if normalized_determinant(z, problem) <= 1e-14 {
            break;
        }
        let h = 1e-6 * (1.0 + z.norm());
        let slope = (f(z + h) - f(z - h)) / (2.0 * h);
        if slope.norm() == 0.0 || !slope.is_finite() {
            return Err(Error::Convergence {
                func: "refine_root",
                x: z.re,
                terms: 0,
                target: ROOT_TOL,
            });
        }
        let step = fz / slope;
        let mut damping = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = z - step * damping;
            let ft = f(trial);
            if ft.is_finite() && ft.norm() < fz.norm() {
                z = trial;
                fz = ft;
                accepted = true;
                break;
            }
            damping *= 0.5;
        }
        if !accepted || (step * damping).norm() <= 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    if normalized_determinant(z, problem) > ROOT_TOL {
        return Err(Error::Convergence {
            func: "refine_root",
            x: z.re,
            terms: 100,
            target: ROOT_TOL,
        });
    }
    Ok(z)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub lambda: C64,
    pub sigma: C64,
    /// Smallest over largest singular value of the system matrix.
    pub null_ratio: f64,
    /// Smallest over second-smallest singular value.
    pub gap_ratio: f64,
    pub ill_conditioned: bool,
    /// Unit-norm `[c+, s+, c-, s-]`.
    pub coefficients: [C64; 4],
    /// `u_xx - sign(x) u_y - lambda u` over the largest term, at 200 points per half.
    pub pde_residual: f64,
    /// First coupling condition over `(|k1| + |k2| + |k3|)` times the largest
    /// boundary value of `phi`, `phi'`.
    pub coupling_left: f64,
    /// Second coupling condition, scaled likewise with `k4, k5, k6`.
    pub coupling_right: f64,
    /// `max |u(x, 0) - alpha u(x, 1)|` over `max |u(x, 0)|`.
    pub nonlocal_residual: f64,
    /// `|phi+(0) - phi-(0)| + |phi+'(0) - phi-'(0)|`.
    pub c1_mismatch: f64,
    pub passed: bool,
}

impl VerificationReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.pde_residual,
            self.coupling_left,
            self.coupling_right,
            self.nonlocal_residual,
            self.c1_mismatch,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Null vectors with `null_ratio` above this are not trusted.
pub const NULL_RATIO_LIMIT: f64 = 1e-6;

/// Rebuilds `u = exp(sigma y) phi(x)` from the null vector of the system at
/// `lambda` and checks every condition pointwise.
pub fn verify_candidate(lambda: C64, problem: &TransmissionProblem) -> VerificationReport {
    let m = dispersion_matrix(lambda, problem);
    let svd = m.svd(false, true);
    let values = svd.singular_values;
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|a, b| values[*a].total_cmp(&values[*b]));
    let (smallest, second, largest) = (values[order[0]], values[order[1]], values[order[3]]);
    let null_ratio = if largest > 0.0 {
        smallest / largest
    } else {
        0.0
    };
    let gap_ratio = if second > 0.0 { smallest / second } else { 0.0 };
    let row = v_t.row(order[0]);
    let mut coeffs = Vector4::new(row[0].conj(), row[1].conj(), row[2].conj(), row[3].conj());
    coeffs /= C64::new(coeffs.norm(), 0.0);
    let coefficients = [coeffs[0], coeffs[1], coeffs[2], coeffs[3]];

    let sigma = problem.sigma();
    let (wp2, wm2) = (lambda + sigma, lambda - sigma);
    let phi = |x: f64| -> (C64, C64) {
        if x >= 0.0 {
            half_profile(wp2, coefficients[0], coefficients[1], x)
        } else {
            half_profile(wm2, coefficients[2], coefficients[3], x)
        }
    };
    // Side chosen by the collocation point so stencils never mix halves.
    let phi_side = |x: f64, right: bool| -> C64 {
        if right {
            half_profile(wp2, coefficients[0], coefficients[1], x).0
        } else {
            half_profile(wm2, coefficients[2], coefficients[3], x).0
        }
    };
    let u = |x: f64, y: f64, right: bool| (sigma * y).exp() * phi_side(x, right);

    const POINTS: usize = 200;
    const H: f64 = 1e-3;
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let (mut pde_abs, mut pde_scale) = (0.0f64, 0.0f64);
    for right in [false, true] {
        for i in 0..POINTS {
            let offset = (i as f64 + 0.5) / POINTS as f64;
            let x = if right { offset } else { -1.0 + offset };
            let y = 0.01 + 0.98 * ((i as f64 + 1.0) * golden).fract();
            let c = u(x, y, right);
            let uxx = (-u(x - 2.0 * H, y, right) + 16.0 * u(x - H, y, right) - 30.0 * c
                + 16.0 * u(x + H, y, right)
                - u(x + 2.0 * H, y, right))
                / (12.0 * H * H);
            let uy = (u(x, y - 2.0 * H, right) - 8.0 * u(x, y - H, right)
                + 8.0 * u(x, y + H, right)
                - u(x, y + 2.0 * H, right))
                / (12.0 * H);
            let sign = if right { 1.0 } else { -1.0 };
            let terms = [uxx, -sign * uy, -lambda * c];
            let residual: C64 = terms.iter().sum();
            pde_abs = pde_abs.max(residual.norm());
            for t in terms {
                pde_scale = pde_scale.max(t.norm());
            }
        }
    }

    let [k1, k2, k3, k4, k5, k6] = problem.k;
    let (pl, dl) = phi(-1.0);
    let (pr, dr) = phi(1.0);
    let boundary = [pl, dl, pr, dr].iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let relative = |terms: &[C64], k_sum: f64| -> f64 {
        let sum: C64 = terms.iter().sum();
        let scale = k_sum * boundary;
        if scale == 0.0 {
            0.0
        } else {
            sum.norm() / scale
        }
    };
    let (left_k, right_k) = (
        k1.abs() + k2.abs() + k3.abs(),
        k4.abs() + k5.abs() + k6.abs(),
    );
    // The y factor is common to every term, so the defects are y-independent;
    // sampling y still exercises the full field.
    let (mut coupling_left, mut coupling_right) = (0.0f64, 0.0f64);
    for j in 0..=20 {
        let e = (sigma * (j as f64 / 20.0)).exp();
        coupling_left = coupling_left.max(relative(
            &[k1 * dl * e, k2 * pl * e, -k3 * dr * e],
            left_k * e.norm(),
        ));
        coupling_right = coupling_right.max(relative(
            &[k4 * dr * e, k5 * pr * e, -k6 * dl * e],
            right_k * e.norm(),
        ));
    }

    let alpha = problem.alpha;
    let (mut nonlocal_abs, mut nonlocal_scale) = (0.0f64, 0.0f64);
    for i in 0..=2 * POINTS {
        let x = -1.0 + i as f64 / POINTS as f64;
        let right = x >= 0.0;
        let (u0, u1) = (u(x, 0.0, right), u(x, 1.0, right));
        nonlocal_abs = nonlocal_abs.max((u0 - alpha * u1).norm());
        nonlocal_scale = nonlocal_scale.max(u0.norm());
    }

    let (p_plus, d_plus) = half_profile(wp2, coefficients[0], coefficients[1], 0.0);
    let (p_minus, d_minus) = half_profile(wm2, coefficients[2], coefficients[3], 0.0);
    let c1_mismatch = (p_plus - p_minus).norm() + (d_plus - d_minus).norm();

    let mut report = VerificationReport {
        lambda,
        sigma,
        null_ratio,
        gap_ratio,
        ill_conditioned: null_ratio > NULL_RATIO_LIMIT,
        coefficients,
        pde_residual: if pde_scale == 0.0 {
            0.0
        } else {
            pde_abs / pde_scale
        },
        coupling_left,
        coupling_right,
        nonlocal_residual: if nonlocal_scale == 0.0 {
            0.0
        } else {
            nonlocal_abs / nonlocal_scale
        },
        c1_mismatch,
        passed: false,
    };
    report.passed = !report.ill_conditioned && report.max_residual() <= VERIFY_TOL;
    report
}
