//! Finite-difference oracles: pointwise residuals of the governing operators
//! and an implicit solver for `u_t = x^-n u_xx + y^-m u_yy - lambda u + f`.
//!
//! The solver uses a cell-centred grid, so the reciprocal weights are finite
//! at every node. Each backward-Euler row is multiplied by `x^n y^m`, which
//! makes the system complex symmetric with a diagonally dominant real part.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::field::partials_or_fd;
use crate::modes::{Convention, Problem2Mode, ProblemSpec, Variant};
use crate::{Error, Result, SmoothField, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    pub cell_centered: bool,
    pub t_end: f64,
}

impl GridSpec {
    pub const MIN_CELLS: usize = 8;

    pub fn new(nx: usize, ny: usize, nt: usize) -> Result<Self> {
        let grid = GridSpec {
            nx,
            ny,
            nt,
            cell_centered: true,
            t_end: 1.0,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn with_t_end(mut self, t_end: f64) -> Result<Self> {
        self.t_end = t_end;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < Self::MIN_CELLS || self.ny < Self::MIN_CELLS || self.nt < Self::MIN_CELLS {
            return Err(Error::InvalidInput(format!(
                "grid needs nx, ny, nt >= {}, got {} x {} x {}",
                Self::MIN_CELLS,
                self.nx,
                self.ny,
                self.nt
            )));
        }
        if !self.cell_centered {
            return Err(Error::InvalidInput(
                "only cell-centred grids are supported".into(),
            ));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        Ok(())
    }

    pub fn hx(&self) -> f64 {
        1.0 / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        1.0 / self.ny as f64
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.nt as f64
    }

    /// `(i + 1/2) / nx`.
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.hx()
    }

    /// `(j + 1/2) / ny`.
    pub fn y(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.hy()
    }
}

/// Cell values, stored with `y` fastest: index `i * ny + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<C64>,
}

impl GridFunction {
    pub fn zeros(grid: &GridSpec) -> Self {
        GridFunction {
            nx: grid.nx,
            ny: grid.ny,
            values: vec![ZERO; grid.nx * grid.ny],
        }
    }

    pub fn sample(grid: &GridSpec, f: impl Fn(f64, f64) -> C64) -> Self {
        let mut values = Vec::with_capacity(grid.nx * grid.ny);
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        GridFunction {
            nx: grid.nx,
            ny: grid.ny,
            values,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.ny + j]
    }

    pub fn matches(&self, grid: &GridSpec) -> bool {
        self.nx == grid.nx && self.ny == grid.ny && self.values.len() == grid.nx * grid.ny
    }

    /// `sqrt(hx hy sum |u|^2)`.
    pub fn l2_norm(&self) -> f64 {
        let cell = 1.0 / (self.nx * self.ny) as f64;
        (cell * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `sqrt(hx hy sum x^n y^m |u|^2)`, the norm the solver does not increase.
    pub fn weighted_norm(&self, m: f64, n: f64) -> f64 {
        let (hx, hy) = (1.0 / self.nx as f64, 1.0 / self.ny as f64);
        let mut sum = 0.0;
        for i in 0..self.nx {
            let xn = ((i as f64 + 0.5) * hx).powf(n);
            for j in 0..self.ny {
                let ym = ((j as f64 + 0.5) * hy).powf(m);
                sum += xn * ym * self.get(i, j).norm_sqr();
            }
        }
        (hx * hy * sum).sqrt()
    }

    /// `||self - other|| / ||other||`; zero when both vanish.
    pub fn relative_l2_error(&self, reference: &GridFunction) -> f64 {
        let diff: f64 = self
            .values
            .iter()
            .zip(&reference.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let scale: f64 = reference.values.iter().map(|v| v.norm_sqr()).sum();
        if diff == 0.0 {
            0.0
        } else {
            (diff / scale).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_abs: f64,
    /// `max_abs` over the largest single operator term seen at any point.
    pub max_rel: f64,
    pub argmax: [f64; 3],
    pub points: usize,
}

/// Residual of the governing operator of `spec.variant` at interior points.
///
/// Problem 1: `y^m u_xx - x^n u_y - lambda x^n y^m u` at `(x, y)`;
/// Problem 2: `y^m u_xx + x^n u_yy - lambda x^n y^m u - x^n y^m u_t` at `(x, y, t)`.
pub fn pde_residual_collocation<F: SmoothField + ?Sized>(
    u: &F,
    spec: &ProblemSpec,
    points: &[[f64; 3]],
) -> Result<ResidualReport> {
    spec.validate()?;
    if spec.variant == Variant::Problem3 {
        return Err(Error::InvalidInput(
            "collocation covers problem1 and problem2; use dispersion::verify_candidate for problem3".into(),
        ));
    }
    let (m, n, lambda) = (spec.m, spec.n, spec.lambda);
    let mut max_abs = 0.0f64;
    let mut scale = 0.0f64;
    let mut argmax = [0.0; 3];
    for &[x, y, t] in points {
        if x <= 0.0 || y <= 0.0 {
            return Err(Error::domain(
                "pde_residual_collocation",
                format!("point ({x}, {y}, {t}) lies on a degeneracy line"),
            ));
        }
        if x >= 1.0 || y >= 1.0 || !(0.0..=1.0).contains(&t) {
            return Err(Error::domain(
                "pde_residual_collocation",
                format!("point ({x}, {y}, {t}) is not interior"),
            ));
        }
        let p = partials_or_fd(u, [x, y, t], [0.0; 3], [1.0; 3]);
        let (xn, ym) = (x.powf(n), y.powf(m));
        let terms: [C64; 4] = match spec.variant {
            Variant::Problem1 => [p.uxx * ym, -p.uy * xn, -lambda * (xn * ym) * p.u, ZERO],
            Variant::Problem2 => [
                p.uxx * ym,
                p.uyy * xn,
                -lambda * (xn * ym) * p.u,
                -p.ut * (xn * ym),
            ],
            Variant::Problem3 => unreachable!("rejected above"),
        };
        let residual: C64 = terms.iter().sum();
        for term in &terms {
            scale = scale.max(term.norm());
        }
        if residual.norm() > max_abs || points.len() == 1 {
            max_abs = max_abs.max(residual.norm());
            argmax = [x, y, t];
        }
    }
    let max_rel = if max_abs == 0.0 { 0.0 } else { max_abs / scale };
    Ok(ResidualReport {
        max_abs,
        max_rel,
        argmax,
        points: points.len(),
    })
}

/// `count` points uniform in `[margin, 1 - margin]^3`, reproducible from `seed`.
pub fn random_interior_points(count: usize, seed: u64, margin: f64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (margin, 1.0 - margin);
    (0..count)
        .map(|_| {
            [
                rng.random_range(lo..hi),
                rng.random_range(lo..hi),
                rng.random_range(lo..hi),
            ]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Keep every `snapshot_stride`-th step; the final step is always kept.
    pub snapshot_stride: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            snapshot_stride: 1,
            tolerance: 1e-12,
            max_iterations: 5000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub u: GridFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evolution {
    /// Starts with the initial slice at step 0.
    pub snapshots: Vec<Snapshot>,
    /// Krylov iterations per time step.
    pub iterations: Vec<usize>,
}

impl Evolution {
    pub fn last(&self) -> &GridFunction {
        &self
            .snapshots
            .last()
            .expect("initial snapshot is always stored")
            .u
    }

    pub fn total_iterations(&self) -> usize {
        self.iterations.iter().sum()
    }
}

/// Source term `f(x, y, t)`.
pub type Source<'a> = &'a (dyn Fn(f64, f64, f64) -> C64 + Sync);

pub fn solve_degenerate_parabolic(
    spec: &ProblemSpec,
    u0: &GridFunction,
    grid: &GridSpec,
    source: Option<Source<'_>>,
) -> Result<Evolution> {
    solve_degenerate_parabolic_with(spec, u0, grid, source, SolverOptions::default())
}

pub fn solve_degenerate_parabolic_with(
    spec: &ProblemSpec,
    u0: &GridFunction,
    grid: &GridSpec,
    source: Option<Source<'_>>,
    options: SolverOptions,
) -> Result<Evolution> {
    spec.validate()?;
    grid.validate()?;
    if !u0.matches(grid) {
        return Err(Error::InvalidInput(format!(
            "initial slice is {} x {}, grid is {} x {}",
            u0.nx, u0.ny, grid.nx, grid.ny
        )));
    }
    if options.snapshot_stride == 0 {
        return Err(Error::InvalidInput(
            "snapshot_stride must be positive".into(),
        ));
    }
    let op = StepOperator::new(spec, grid);
    let dt = grid.dt();
    let mut u = u0.values.clone();
    let mut snapshots = vec![Snapshot {
        step: 0,
        t: 0.0,
        u: u0.clone(),
    }];
    let mut iterations = Vec::with_capacity(grid.nt);
    let mut rhs = vec![ZERO; u.len()];
    for step in 1..=grid.nt {
        let t = step as f64 * dt;
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                let idx = i * grid.ny + j;
                let f = source.map_or(ZERO, |s| s(grid.x(i), grid.y(j), t));
                rhs[idx] = op.weight[idx] * (u[idx] + dt * f);
            }
        }
        let its = bicgstab(&op, &rhs, &mut u, options.tolerance, options.max_iterations)?;
        iterations.push(its);
        if step % options.snapshot_stride == 0 || step == grid.nt {
            snapshots.push(Snapshot {
                step,
                t,
                u: GridFunction {
                    nx: grid.nx,
                    ny: grid.ny,
                    values: u.clone(),
                },
            });
        }
    }
    Ok(Evolution {
        snapshots,
        iterations,
    })
}

/// `w (1 + dt lambda) u - dt (y^m D_xx u + x^n D_yy u)`, `w = x^n y^m`,
/// with ghost cells `-u` outside every face.
struct StepOperator {
    nx: usize,
    ny: usize,
    weight: Vec<f64>,
    /// `dt y_j^m / hx^2` per row `j`.
    cx: Vec<f64>,
    /// `dt x_i^n / hy^2` per column `i`.
    cy: Vec<f64>,
    shift: C64,
    diagonal: Vec<C64>,
}

impl StepOperator {
    fn new(spec: &ProblemSpec, grid: &GridSpec) -> Self {
        let dt = grid.dt();
        let (nx, ny) = (grid.nx, grid.ny);
        let xn: Vec<f64> = (0..nx).map(|i| grid.x(i).powf(spec.n)).collect();
        let ym: Vec<f64> = (0..ny).map(|j| grid.y(j).powf(spec.m)).collect();
        let cx: Vec<f64> = ym
            .iter()
            .map(|w| dt * w / (grid.hx() * grid.hx()))
            .collect();
        let cy: Vec<f64> = xn
            .iter()
            .map(|w| dt * w / (grid.hy() * grid.hy()))
            .collect();
        let shift = C64::new(1.0, 0.0) + dt * spec.lambda;
        let mut weight = Vec::with_capacity(nx * ny);
        let mut diagonal = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            let sx = if i == 0 || i == nx - 1 { 3.0 } else { 2.0 };
            for j in 0..ny {
                let sy = if j == 0 || j == ny - 1 { 3.0 } else { 2.0 };
                let w = xn[i] * ym[j];
                weight.push(w);
                diagonal.push(shift * w + sx * cx[j] + sy * cy[i]);
            }
        }
        StepOperator {
            nx,
            ny,
            weight,
            cx,
            cy,
            shift,
            diagonal,
        }
    }

    fn apply(&self, u: &[C64], out: &mut [C64]) {
        let (nx, ny) = (self.nx, self.ny);
        for i in 0..nx {
            for j in 0..ny {
                let idx = i * ny + j;
                let c = u[idx];
                let left = if i > 0 { u[idx - ny] } else { -c };
                let right = if i + 1 < nx { u[idx + ny] } else { -c };
                let down = if j > 0 { u[idx - 1] } else { -c };
                let up = if j + 1 < ny { u[idx + 1] } else { -c };
                out[idx] = self.shift * self.weight[idx] * c
                    - self.cx[j] * (left - 2.0 * c + right)
                    - self.cy[i] * (down - 2.0 * c + up);
            }
        }
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Jacobi-preconditioned BiCGSTAB; `x` holds the initial guess on entry.
fn bicgstab(op: &StepOperator, b: &[C64], x: &mut [C64], tol: f64, max_it: usize) -> Result<usize> {
    let len = b.len();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = ZERO);
        return Ok(0);
    }
    let target = tol * b_norm;
    let mut r = vec![ZERO; len];
    op.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    if norm(&r) <= target {
        return Ok(0);
    }
    let mut r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) =
        (C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0));
    let mut v = vec![ZERO; len];
    let mut p = vec![ZERO; len];
    let mut y = vec![ZERO; len];
    let mut s = vec![ZERO; len];
    let mut z = vec![ZERO; len];
    let mut t = vec![ZERO; len];
    let mut residual = norm(&r);
    for it in 1..=max_it {
        let rho_new = dot(&r_hat, &r);
        if rho_new.norm() < 1e-300 {
            // Restart with the current residual as shadow vector.
            r_hat.copy_from_slice(&r);
            p.iter_mut().for_each(|v| *v = ZERO);
            v.iter_mut().for_each(|v| *v = ZERO);
            rho = C64::new(1.0, 0.0);
            alpha = rho;
            omega = rho;
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..len {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
            y[k] = p[k] / op.diagonal[k];
        }
        op.apply(&y, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for k in 0..len {
            s[k] = r[k] - alpha * v[k];
        }
        if norm(&s) <= target {
            for k in 0..len {
                x[k] += alpha * y[k];
            }
            return Ok(it);
        }
        for k in 0..len {
            z[k] = s[k] / op.diagonal[k];
        }
        op.apply(&z, &mut t);
        omega = dot(&t, &s) / dot(&t, &t);
        for k in 0..len {
            x[k] += alpha * y[k] + omega * z[k];
            r[k] = s[k] - omega * t[k];
        }
        residual = norm(&r);
        if residual <= target {
            return Ok(it);
        }
        if !residual.is_finite() {
            break;
        }
    }
    Err(Error::SolverDiverged {
        iterations: max_it,
        residual: residual / b_norm,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayLevel {
    pub grid: GridSpec,
    pub error_l2: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub k: usize,
    pub p: usize,
    pub s: i64,
    pub lambda: C64,
    /// The requested grid followed by two time refinements (`nt` x2, x4).
    pub levels: Vec<DecayLevel>,
    /// `error[l] / error[l + 1]`.
    pub ratios: Vec<f64>,
    /// `log2` of the last ratio.
    pub order_estimate: f64,
}

impl DecayReport {
    pub fn error_l2(&self) -> f64 {
        self.levels[0].error_l2
    }
}

/// Evolves `X_k(x) Y_p(y)` with the mode's own eigenvalue up to `t_end` and
/// compares against `T(t_end) X_k Y_p`.
pub fn decay_check(
    k: usize,
    p: usize,
    s: i64,
    spec: &ProblemSpec,
    grid: &GridSpec,
) -> Result<DecayReport> {
    let mode = Problem2Mode::new(k, p, s, spec, Convention::Consistent)?;
    let own = mode.spec();
    let u0 = GridFunction::sample(grid, |x, y| mode.value(x, y, 0.0));
    let growth = mode.temporal(grid.t_end) / mode.temporal(0.0);
    let exact = GridFunction {
        nx: u0.nx,
        ny: u0.ny,
        values: u0.values.iter().map(|v| v * growth).collect(),
    };
    let options = SolverOptions {
        snapshot_stride: usize::MAX,
        ..SolverOptions::default()
    };
    let mut levels = Vec::with_capacity(3);
    for factor in [1, 2, 4] {
        let level_grid = GridSpec {
            nt: grid.nt * factor,
            ..*grid
        };
        let run = solve_degenerate_parabolic_with(&own, &u0, &level_grid, None, options)?;
        levels.push(DecayLevel {
            grid: level_grid,
            error_l2: run.last().relative_l2_error(&exact),
            iterations: run.total_iterations(),
        });
    }
    let ratios: Vec<f64> = levels
        .windows(2)
        .map(|w| w[0].error_l2 / w[1].error_l2)
        .collect();
    let order_estimate = ratios.last().map_or(f64::NAN, |r| r.log2());
    Ok(DecayReport {
        k,
        p,
        s,
        lambda: own.lambda,
        levels,
        ratios,
        order_estimate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmsReport {
    pub levels: Vec<DecayLevel>,
    pub ratios: Vec<f64>,
    /// `log2` of the last ratio.
    pub order_estimate: f64,
}

/// Manufactured solution `u* = exp(-t) x(1 - x) y(1 - y)`.
pub fn manufactured_solution(x: f64, y: f64, t: f64) -> f64 {
    (-t).exp() * x * (1.0 - x) * y * (1.0 - y)
}

/// Spatial convergence on `u*` with matching source. Each level doubles
/// `nx` and `ny` and quadruples `nt`, so `dt` shrinks with `h^2`.
pub fn mms_check(spec: &ProblemSpec, coarse: &GridSpec, levels: usize) -> Result<MmsReport> {
    spec.validate()?;
    coarse.validate()?;
    if levels < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least two levels, got {levels}"
        )));
    }
    let (m, n, lambda) = (spec.m, spec.n, spec.lambda);
    let source = move |x: f64, y: f64, t: f64| {
        let e = (-t).exp();
        let (gx, gy) = (x * (1.0 - x), y * (1.0 - y));
        let u = e * gx * gy;
        let uxx = -2.0 * e * gy;
        let uyy = -2.0 * e * gx;
        -u - x.powf(-n) * uxx - y.powf(-m) * uyy + lambda * u
    };
    let options = SolverOptions {
        snapshot_stride: usize::MAX,
        ..SolverOptions::default()
    };
    let mut out = Vec::with_capacity(levels);
    for level in 0..levels {
        let scale = 1usize << level;
        let grid = GridSpec {
            nx: coarse.nx * scale,
            ny: coarse.ny * scale,
            nt: coarse.nt * scale * scale,
            ..*coarse
        };
        let u0 = GridFunction::sample(&grid, |x, y| {
            C64::new(manufactured_solution(x, y, 0.0), 0.0)
        });
        let exact = GridFunction::sample(&grid, |x, y| {
            C64::new(manufactured_solution(x, y, grid.t_end), 0.0)
        });
        let run = solve_degenerate_parabolic_with(spec, &u0, &grid, Some(&source), options)?;
        out.push(DecayLevel {
            grid,
            error_l2: run.last().relative_l2_error(&exact),
            iterations: run.total_iterations(),
        });
    }
    let ratios: Vec<f64> = out
        .windows(2)
        .map(|w| w[0].error_l2 / w[1].error_l2)
        .collect();
    let order_estimate = ratios.last().map_or(f64::NAN, |r| r.log2());
    Ok(MmsReport {
        levels: out,
        ratios,
        order_estimate,
    })
}
