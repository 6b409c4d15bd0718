//! Command dispatch. Each command returns JSON results, a flat table and a
//! pass/fail verdict.

use npl_core::dispersion::{scan_roots, Region, TransmissionProblem};
use npl_core::energy::{
    energy_functional_problem2, energy_identity_problem2, green_residual_problem2,
};
use npl_core::modes::{
    check_uniqueness_conditions, EigenMode, Problem1Mode, Problem2Mode, ProblemSpec, Variant,
};
use npl_core::oracle::{
    decay_check, mms_check, pde_residual_collocation, random_interior_points, GridSpec,
};
use npl_core::roots::bessel_j_zeros;
use npl_core::{Error, SmoothField, C64};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{Command, RunConfig};
use crate::report::{num, Table};

/// Collocation points stay this far from the degeneracy lines.
pub const COLLOCATION_MARGIN: f64 = 0.02;
/// Accepted MMS order band.
pub const MMS_ORDER_BAND: (f64, f64) = (1.7, 2.3);
/// Default tolerance for the energy functional on exact modes.
pub const ENERGY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum RunError {
    /// Bad input detected by the numerical core.
    #[error("{0}")]
    Usage(Error),
    #[error("{0}")]
    Compute(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::Domain { .. } | Error::Parity { .. } => {
                RunError::Usage(e)
            }
            other => RunError::Compute(other),
        }
    }
}

pub struct Outcome {
    pub results: Value,
    pub table: Table,
    pub passed: bool,
    /// One line for stderr.
    pub summary: String,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serialises")
}

fn c64_cells(z: C64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

fn spec_of(config: &RunConfig) -> Result<ProblemSpec, RunError> {
    let spec = ProblemSpec::new(
        config.m.expect("resolved"),
        config.n.expect("resolved"),
        config.alpha.expect("resolved"),
        config.lambda.unwrap_or_default(),
        config.variant.expect("resolved"),
    )?;
    Ok(spec)
}

fn grid_of(config: &RunConfig) -> Result<GridSpec, RunError> {
    let grid = GridSpec::new(
        config.nx.expect("resolved"),
        config.ny.expect("resolved"),
        config.nt.expect("resolved"),
    )?
    .with_t_end(config.t_end.expect("resolved"))?;
    Ok(grid)
}

pub fn run(config: &RunConfig) -> Result<Outcome, RunError> {
    match config.command {
        Command::Roots => roots(config),
        Command::Modes => modes(config),
        Command::Verify => verify(config),
        Command::Energy => energy(config),
        Command::Decay => decay(config),
        Command::Mms => mms(config),
        Command::Dispersion => dispersion(config),
        Command::Sweep => sweep(config),
    }
}

fn roots(config: &RunConfig) -> Result<Outcome, RunError> {
    let nu = config.nu.expect("resolved");
    let table_data = bessel_j_zeros(nu, config.count.expect("resolved"))?;
    let mut table = Table::new(&["k", "zero", "residual"]);
    for (i, (z, r)) in table_data
        .zeros
        .iter()
        .zip(&table_data.residuals)
        .enumerate()
    {
        table.push(vec![(i + 1).to_string(), num(*z), num(*r)]);
    }
    Ok(Outcome {
        summary: format!("{} zeros of J_{nu}", table_data.len()),
        results: to_value(&table_data),
        table,
        passed: true,
    })
}

#[derive(Debug, Clone, Serialize)]
struct LatticeEntry {
    alpha: C64,
    #[serde(flatten)]
    mode: EigenMode,
}

const LATTICE_HEADER: &[&str] = &[
    "alpha_re",
    "alpha_im",
    "k",
    "p",
    "s",
    "mu",
    "lambda_re",
    "lambda_im",
];

fn lattice_row(e: &LatticeEntry) -> Vec<String> {
    let [are, aim] = c64_cells(e.alpha);
    let [lre, lim] = c64_cells(e.mode.lambda);
    vec![
        are,
        aim,
        e.mode.k.to_string(),
        e.mode.p.to_string(),
        e.mode.s.to_string(),
        num(e.mode.mu),
        lre,
        lim,
    ]
}

/// Index tuples `(k, p, s)` of a lattice, in output order.
fn lattice_indices(config: &RunConfig) -> Vec<(usize, usize, i64)> {
    let smax = config.smax.unwrap_or(0);
    let s_range: Vec<i64> = match config.variant {
        Some(Variant::Problem1) => vec![0],
        _ => (-smax..=smax).collect(),
    };
    let mut out = Vec::new();
    for k in 1..=config.kmax.expect("resolved") {
        for p in 1..=config.pmax.expect("resolved") {
            for &s in &s_range {
                out.push((k, p, s));
            }
        }
    }
    out
}

fn lattice_mode(
    spec: &ProblemSpec,
    config: &RunConfig,
    (k, p, s): (usize, usize, i64),
) -> Result<Option<EigenMode>, Error> {
    match spec.variant {
        Variant::Problem2 => EigenMode::problem2(k, p, s, spec, config.convention).map(Some),
        // Only p with (-1)^p = sign(alpha) admit a mode.
        Variant::Problem1 => match EigenMode::problem1(k, p, spec, config.convention) {
            Err(Error::Parity { .. }) => Ok(None),
            other => other.map(Some),
        },
        Variant::Problem3 => Err(Error::InvalidInput(
            "mode lattices are defined for problem1 and problem2".into(),
        )),
    }
}

fn modes(config: &RunConfig) -> Result<Outcome, RunError> {
    let spec = spec_of(config)?;
    let mut entries = Vec::new();
    for idx in lattice_indices(config) {
        if let Some(mode) = lattice_mode(&spec, config, idx)? {
            entries.push(LatticeEntry {
                alpha: spec.alpha,
                mode,
            });
        }
    }
    let mut table = Table::new(LATTICE_HEADER);
    entries.iter().for_each(|e| table.push(lattice_row(e)));
    let uniqueness = check_uniqueness_conditions(&spec, None)?;
    Ok(Outcome {
        summary: format!("{} modes", entries.len()),
        results: json!({ "modes": entries, "uniqueness": uniqueness }),
        table,
        passed: true,
    })
}

fn verify(config: &RunConfig) -> Result<Outcome, RunError> {
    let spec = spec_of(config)?;
    let (k, p, s) = (
        config.k.expect("resolved"),
        config.p.expect("resolved"),
        config.s.expect("resolved"),
    );
    let tolerance = config.tolerance.expect("resolved");
    let points = random_interior_points(
        config.points.expect("resolved"),
        config.seed,
        COLLOCATION_MARGIN,
    );
    let (mode, residual, nonlocal) = match spec.variant {
        Variant::Problem2 => {
            let field = Problem2Mode::new(k, p, s, &spec, config.convention)?;
            let residual = pde_residual_collocation(&field, &field.spec(), &points)?;
            let nonlocal = points
                .iter()
                .map(|q| {
                    let u0 = field.value(q[0], q[1], 0.0);
                    let u1 = field.value(q[0], q[1], 1.0);
                    (u0 - spec.alpha * u1).norm() / u0.norm().max(f64::MIN_POSITIVE)
                })
                .fold(0.0, f64::max);
            (field.mode, residual, Some(nonlocal))
        }
        Variant::Problem1 => {
            let field = Problem1Mode::new(k, p, &spec, config.convention)?;
            let residual = pde_residual_collocation(&field, &field.spec(), &points)?;
            (field.mode, residual, None)
        }
        Variant::Problem3 => {
            return Err(Error::InvalidInput(
                "verify supports problem1 and problem2; use dispersion for problem3".into(),
            )
            .into())
        }
    };
    let passed = residual.max_rel <= tolerance && nonlocal.is_none_or(|d| d <= tolerance);
    let mut table = Table::new(&[
        "k",
        "p",
        "s",
        "lambda_re",
        "lambda_im",
        "max_abs",
        "max_rel",
        "nonlocal_rel",
        "passed",
    ]);
    let [lre, lim] = c64_cells(mode.lambda);
    table.push(vec![
        k.to_string(),
        p.to_string(),
        mode.s.to_string(),
        lre,
        lim,
        num(residual.max_abs),
        num(residual.max_rel),
        nonlocal.map(num).unwrap_or_default(),
        passed.to_string(),
    ]);
    Ok(Outcome {
        summary: format!(
            "max_rel = {:.3e} (tolerance {tolerance:e})",
            residual.max_rel
        ),
        results: json!({
            "mode": mode,
            "residual": residual,
            "nonlocal_rel": nonlocal,
            "tolerance": tolerance,
            "passed": passed,
        }),
        table,
        passed,
    })
}

fn energy(config: &RunConfig) -> Result<Outcome, RunError> {
    let spec = spec_of(config)?;
    if spec.variant != Variant::Problem2 {
        return Err(Error::InvalidInput("energy supports problem2 modes".into()).into());
    }
    let (k, p, s) = (
        config.k.expect("resolved"),
        config.p.expect("resolved"),
        config.s.expect("resolved"),
    );
    let tolerance = config.tolerance.unwrap_or(ENERGY_TOLERANCE);
    let field = Problem2Mode::new(k, p, s, &spec, config.convention)?;
    let own = field.spec();
    let identity = energy_identity_problem2(&field, &own, config.quad_order)?;
    let green = green_residual_problem2(&field, &own, config.quad_order)?;
    let functional = energy_functional_problem2(&field, &own, config.quad_order)?;
    let functional_ok = functional.value.abs() <= tolerance;
    let passed = identity.holds() && functional_ok;
    let mut table = Table::new(&["quantity", "value"]);
    for term in &identity.terms {
        table.push(vec![format!("identity_{}", term.name), num(term.value)]);
    }
    for term in &functional.terms {
        table.push(vec![format!("functional_{}", term.name), num(term.value)]);
    }
    table.push(vec!["identity_defect".into(), num(identity.defect)]);
    table.push(vec!["identity_tolerance".into(), num(identity.tolerance)]);
    table.push(vec!["green_residual".into(), num(green)]);
    table.push(vec!["functional".into(), num(functional.value)]);
    Ok(Outcome {
        summary: format!(
            "identity defect {:.3e} (tolerance {:.1e}), functional {:.3e}: {}",
            identity.defect,
            identity.tolerance,
            functional.value,
            if passed { "holds" } else { "violated" }
        ),
        results: json!({
            "mode": field.mode,
            "identity": identity,
            "green_residual": green,
            "functional": functional,
            "functional_tolerance": tolerance,
            "passed": passed,
        }),
        table,
        passed,
    })
}

fn level_table(levels: &[npl_core::oracle::DecayLevel]) -> Table {
    let mut table = Table::new(&["level", "nx", "ny", "nt", "error_l2", "iterations"]);
    for (i, l) in levels.iter().enumerate() {
        table.push(vec![
            i.to_string(),
            l.grid.nx.to_string(),
            l.grid.ny.to_string(),
            l.grid.nt.to_string(),
            num(l.error_l2),
            l.iterations.to_string(),
        ]);
    }
    table
}

fn decay(config: &RunConfig) -> Result<Outcome, RunError> {
    let spec = spec_of(config)?;
    let grid = grid_of(config)?;
    let tolerance = config.tolerance.expect("resolved");
    let report = decay_check(
        config.k.expect("resolved"),
        config.p.expect("resolved"),
        config.s.expect("resolved"),
        &spec,
        &grid,
    )?;
    let passed = report.error_l2() <= tolerance;
    Ok(Outcome {
        summary: format!(
            "relative L2 error {:.4} (tolerance {tolerance}), time ratio {:.3}",
            report.error_l2(),
            report.ratios.last().copied().unwrap_or(f64::NAN)
        ),
        table: level_table(&report.levels),
        results: json!({ "report": report, "tolerance": tolerance, "passed": passed }),
        passed,
    })
}

fn mms(config: &RunConfig) -> Result<Outcome, RunError> {
    let spec = spec_of(config)?;
    let grid = grid_of(config)?;
    let report = mms_check(&spec, &grid, config.levels.expect("resolved"))?;
    let (lo, hi) = MMS_ORDER_BAND;
    let passed = (lo..=hi).contains(&report.order_estimate);
    Ok(Outcome {
        summary: format!(
            "spatial order {:.3} (band [{lo}, {hi}])",
            report.order_estimate
        ),
        table: level_table(&report.levels),
        results: json!({ "report": report, "band": [lo, hi], "passed": passed }),
        passed,
    })
}

fn dispersion(config: &RunConfig) -> Result<Outcome, RunError> {
    let alpha = config.alpha.expect("resolved");
    if alpha.im != 0.0 {
        return Err(
            Error::InvalidInput(format!("dispersion requires a real alpha, got {alpha}")).into(),
        );
    }
    let k = config.k_coeffs.expect("resolved");
    let problem = TransmissionProblem::new(k, alpha.re, config.s.expect("resolved"))?;
    let [re_lo, re_hi, im_lo, im_hi] = config.region.expect("resolved");
    let region = Region {
        re: (re_lo, re_hi),
        im: (im_lo, im_hi),
    };
    let [n_re, n_im] = config.density.expect("resolved");
    let scan = scan_roots(region, (n_re, n_im), &problem)?;
    // The lambda clause of the uniqueness conditions is checked at the far end
    // of the region; it only applies when the region lies on the positive reals.
    let on_positive_reals = im_lo == 0.0 && im_hi == 0.0 && re_lo > 0.0;
    let spec = ProblemSpec {
        m: 1.0,
        n: 1.0,
        alpha,
        lambda: C64::new(re_hi, 0.0),
        variant: Variant::Problem3,
    };
    let uniqueness = check_uniqueness_conditions(&spec, Some(k))?;
    let all_verified = scan.candidates.iter().all(|c| c.verification.passed);
    let contradicts = on_positive_reals && uniqueness.guaranteed && !scan.candidates.is_empty();
    let passed = all_verified && !contradicts;
    // The CSV view is the sampled normalised determinant; candidates go to JSON.
    let mut table = Table::new(&["lambda_re", "lambda_im", "abs_det"]);
    for (im, row) in scan.im_samples.iter().zip(&scan.samples) {
        for (re, v) in scan.re_samples.iter().zip(row) {
            table.push(vec![num(*re), num(*im), num(*v)]);
        }
    }
    Ok(Outcome {
        summary: format!(
            "{} candidates from {} seeds, min normalised |det| {:.3e}",
            scan.candidates.len(),
            scan.seeds,
            scan.min_abs_det
        ),
        results: json!({
            "sigma": problem.sigma(),
            "uniqueness": uniqueness,
            "region_on_positive_reals": on_positive_reals,
            "region": scan.region,
            "re_samples": scan.re_samples,
            "im_samples": scan.im_samples,
            "samples": scan.samples,
            "min_abs_det": scan.min_abs_det,
            "seeds": scan.seeds,
            "newton_failures": scan.newton_failures,
            "candidates": scan.candidates,
            "passed": passed,
        }),
        table,
        passed,
    })
}

fn sweep(config: &RunConfig) -> Result<Outcome, RunError> {
    let alphas = config.alphas.clone().expect("resolved");
    let indices = lattice_indices(config);
    let specs = alphas
        .iter()
        .map(|&alpha| {
            let c = RunConfig {
                alpha: Some(alpha),
                ..config.clone()
            };
            spec_of(&c)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let tasks: Vec<(usize, (usize, usize, i64))> = (0..specs.len())
        .flat_map(|a| indices.iter().map(move |&idx| (a, idx)))
        .collect();
    let mut computed = tasks
        .par_iter()
        .map(|&(a, idx)| lattice_mode(&specs[a], config, idx).map(|m| (a, idx, m)))
        .collect::<Result<Vec<_>, Error>>()?;
    computed.sort_by_key(|&(a, (k, p, s), _)| (a, k, p, s));
    let entries: Vec<LatticeEntry> = computed
        .into_iter()
        .filter_map(|(a, _, m)| {
            m.map(|mode| LatticeEntry {
                alpha: alphas[a],
                mode,
            })
        })
        .collect();
    let offenders: Vec<&LatticeEntry> = entries
        .iter()
        .filter(|e| e.alpha.norm() < 1.0 && e.mode.lambda.re >= 0.0)
        .collect();
    let passed = offenders.is_empty();
    let mut table = Table::new(LATTICE_HEADER);
    entries.iter().for_each(|e| table.push(lattice_row(e)));
    Ok(Outcome {
        summary: format!(
            "{} modes over {} alphas, {} with Re lambda >= 0 at |alpha| < 1",
            entries.len(),
            alphas.len(),
            offenders.len()
        ),
        results: json!({ "modes": entries, "nonnegative_re_lambda": offenders, "passed": passed }),
        table,
        passed,
    })
}
