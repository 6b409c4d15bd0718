//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line to stderr
//! (uncaptured) and then asserts the criterion.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use clap::Parser;
use npl_cli::{execute, Cli, EXIT_OK};
use npl_core::dispersion::{scan_roots, Region, TransmissionProblem, VERIFY_TOL};
use npl_core::energy::{
    energy_functional_problem2, energy_identity_problem2, green_residual_problem2,
};
use npl_core::modes::{
    check_uniqueness_conditions, Convention, Problem1Mode, Problem2Mode, ProblemSpec, Variant,
};
use npl_core::oracle::{
    decay_check, mms_check, pde_residual_collocation, random_interior_points, GridSpec,
};
use npl_core::roots::bessel_j_zeros;
use npl_core::specfun::{bessel_i, bessel_j};
use npl_core::{SmoothField, C64};
use serde_json::Value;

fn line(criterion: u32, passed: bool, elapsed: Duration, detail: &str) {
    let verdict = if passed { "PASS" } else { "FAIL" };
    let text = format!(
        "acceptance {criterion}: {verdict} ({:.2} s) {detail}\n",
        elapsed.as_secs_f64()
    );
    // Written directly so the line shows without --nocapture.
    let _ = std::io::stderr().write_all(text.as_bytes());
}

fn finish(criterion: u32, start: Instant, limit_s: f64, checks: &[(bool, String)]) {
    let elapsed = start.elapsed();
    let in_time = elapsed.as_secs_f64() < limit_s;
    let passed = in_time && checks.iter().all(|c| c.0);
    let mut detail: Vec<String> = checks
        .iter()
        .map(|(ok, d)| format!("[{}] {d}", if *ok { "ok" } else { "fail" }))
        .collect();
    detail.push(format!(
        "[{}] runtime < {limit_s} s",
        if in_time { "ok" } else { "fail" }
    ));
    line(criterion, passed, elapsed, &detail.join("; "));
    assert!(passed, "criterion {criterion}: {}", detail.join("; "));
}

fn problem2(m: f64, n: f64, alpha: C64) -> ProblemSpec {
    ProblemSpec::new(m, n, alpha, C64::new(0.0, 0.0), Variant::Problem2).unwrap()
}

#[test]
fn criterion_1_special_function_closed_forms() {
    let start = Instant::now();
    let mut worst_j = 0.0f64;
    let mut worst_i = 0.0f64;
    let mut worst_rec = 0.0f64;
    for i in 0..=4000 {
        let x = 0.01 + (20.0 - 0.01) * i as f64 / 4000.0;
        let scale = (2.0 / (PI * x)).sqrt();
        worst_j = worst_j.max((bessel_j(0.5, x).unwrap() - scale * x.sin()).abs());
        let exact_i = scale * x.sinh();
        worst_i = worst_i.max((bessel_i(0.5, x).unwrap() - exact_i).abs() / exact_i.max(1.0));
        for nu in [0.25, 1.0 / 3.0, 0.5, 1.5] {
            let (a, b, c) = (
                bessel_j(nu - 1.0, x).unwrap(),
                bessel_j(nu, x).unwrap(),
                bessel_j(nu + 1.0, x).unwrap(),
            );
            worst_rec = worst_rec.max((a + c - 2.0 * nu / x * b).abs() / b.abs().max(1.0));
        }
    }
    finish(
        1,
        start,
        1.0,
        &[
            (
                worst_j <= 1e-12,
                format!("J_1/2 sup error {worst_j:.2e} <= 1e-12"),
            ),
            (
                worst_i <= 1e-12,
                format!("I_1/2 sup relative error {worst_i:.2e} <= 1e-12"),
            ),
            (
                worst_rec <= 1e-10,
                format!("recurrence defect {worst_rec:.2e} <= 1e-10"),
            ),
        ],
    );
}

#[test]
fn criterion_2_eigenvalue_table() {
    let start = Instant::now();
    let half = bessel_j_zeros(0.5, 20).unwrap();
    let worst = half
        .zeros
        .iter()
        .enumerate()
        .map(|(k, z)| (z - (k + 1) as f64 * PI).abs())
        .fold(0.0, f64::max);
    // J_nu and J_{nu+1} zeros interlace: j_{nu,k} < j_{nu+1,k} < j_{nu,k+1}.
    let mut interlace = true;
    for nu in [0.25, 1.0 / 3.0, 0.5] {
        let a = bessel_j_zeros(nu, 21).unwrap();
        let b = bessel_j_zeros(nu + 1.0, 20).unwrap();
        for k in 0..20 {
            interlace &= a.zeros[k] < b.zeros[k] && b.zeros[k] < a.zeros[k + 1];
        }
    }
    finish(
        2,
        start,
        1.0,
        &[
            (
                half.len() == 20 && worst <= 1e-10,
                format!("20 zeros of J_1/2 within {worst:.2e} of k pi"),
            ),
            (interlace, "interlacing for nu in {1/4, 1/3, 1/2}".into()),
        ],
    );
}

#[test]
fn criterion_3_problem2_modes() {
    let start = Instant::now();
    let exps = [0.5, 1.0, 2.0];
    let alphas = [C64::new(0.5, 0.0), C64::new(-0.8, 0.0), C64::new(0.3, 0.4)];
    let points = random_interior_points(16, 3, 0.02);
    let (mut worst_res, mut worst_nl, mut re_ok, mut cases) = (0.0f64, 0.0f64, true, 0);
    for m in exps {
        for n in exps {
            for alpha in alphas {
                let spec = problem2(m, n, alpha);
                for k in 1..=3 {
                    for p in 1..=3 {
                        for s in 0..=1 {
                            let mode =
                                Problem2Mode::new(k, p, s, &spec, Convention::Consistent).unwrap();
                            let r = pde_residual_collocation(&mode, &mode.spec(), &points).unwrap();
                            worst_res = worst_res.max(r.max_rel);
                            for q in &points {
                                let d = mode.value(q[0], q[1], 0.0)
                                    - alpha * mode.value(q[0], q[1], 1.0);
                                worst_nl = worst_nl.max(d.norm());
                            }
                            if alpha.norm() < 1.0 {
                                re_ok &= mode.mode.lambda.re < 0.0;
                            }
                            cases += 1;
                        }
                    }
                }
            }
        }
    }
    finish(
        3,
        start,
        30.0,
        &[
            (
                worst_res <= 1e-8,
                format!("{cases} modes, collocation residual {worst_res:.2e} <= 1e-8"),
            ),
            (
                worst_nl <= 1e-10,
                format!("non-local defect {worst_nl:.2e} <= 1e-10"),
            ),
            (re_ok, "Re lambda < 0 for |alpha| < 1".into()),
        ],
    );
}

#[test]
fn criterion_4_problem1_modes() {
    let start = Instant::now();
    let points = random_interior_points(16, 5, 0.02);
    let (mut worst_consistent, mut best_literal) = (0.0f64, f64::INFINITY);
    for m in [0.5, 1.0, 2.0] {
        for n in [0.5, 1.0, 2.0] {
            for alpha in [0.5, -0.5] {
                let spec = ProblemSpec::new(
                    m,
                    n,
                    C64::new(alpha, 0.0),
                    C64::new(0.0, 0.0),
                    Variant::Problem1,
                )
                .unwrap();
                for k in 1..=3 {
                    // (-1)^p must match the sign of alpha.
                    for p in (1..=4).filter(|p| (p % 2 == 0) == (alpha > 0.0)) {
                        let good = Problem1Mode::new(k, p, &spec, Convention::Consistent).unwrap();
                        let r = pde_residual_collocation(&good, &good.spec(), &points).unwrap();
                        worst_consistent = worst_consistent.max(r.max_rel);
                        let literal = Problem1Mode::new(k, p, &spec, Convention::Literal).unwrap();
                        let r =
                            pde_residual_collocation(&literal, &literal.spec(), &points).unwrap();
                        best_literal = best_literal.min(r.max_rel);
                    }
                }
            }
        }
    }
    finish(
        4,
        start,
        10.0,
        &[
            (
                worst_consistent <= 1e-8,
                format!("sign-corrected residual {worst_consistent:.2e} <= 1e-8"),
            ),
            (
                best_literal >= 0.1,
                format!("literal +mu residual at least {best_literal:.3} (O(1))"),
            ),
        ],
    );
}

#[test]
fn criterion_5_energy_identities() {
    let start = Instant::now();
    let mut checks = Vec::new();
    let (mut worst32, mut monotone, mut worst_functional, mut min_positive) =
        (0.0f64, true, 0.0f64, f64::INFINITY);
    for (m, n) in [(1.0, 1.0), (0.5, 2.0), (2.0, 0.5)] {
        for alpha in [C64::new(0.5, 0.0), C64::new(0.3, 0.4)] {
            let mode =
                Problem2Mode::new(1, 2, 1, &problem2(m, n, alpha), Convention::Consistent).unwrap();
            let own = mode.spec();
            let defects: Vec<f64> = [16, 32, 64]
                .iter()
                .map(|q| energy_identity_problem2(&mode, &own, *q).unwrap().defect)
                .collect();
            worst32 = worst32.max(defects[1]);
            // Non-increasing above the rounding floor.
            monotone &= defects.windows(2).all(|w| w[1] <= w[0] + 1e-12);
            let f = energy_functional_problem2(&mode, &own, 32).unwrap();
            worst_functional = worst_functional.max(f.value.abs());
            let zeroed = own.with_lambda(C64::new(0.0, own.lambda.im));
            min_positive = min_positive.min(
                energy_functional_problem2(&mode, &zeroed, 32)
                    .unwrap()
                    .value,
            );
        }
    }
    checks.push((
        worst32 <= 1e-8,
        format!("identity defect {worst32:.2e} <= 1e-8 at order 32"),
    ));
    checks.push((
        monotone,
        "defect non-increasing over orders 16, 32, 64".into(),
    ));
    checks.push((
        worst_functional <= 1e-8,
        format!("functional on modes {worst_functional:.2e} <= 1e-8"),
    ));
    checks.push((
        min_positive > 0.0,
        format!("functional with lambda1 = 0 at least {min_positive:.3e} > 0"),
    ));

    let u = |x: f64, y: f64, t: f64| C64::new(1.0 + x * y - 0.5 * t * x * x, y * (1.0 - t) + x);
    let spec = ProblemSpec::new(
        1.0,
        2.0,
        C64::new(0.5, 0.0),
        C64::new(2.0, -1.0),
        Variant::Problem2,
    )
    .unwrap();
    let report = energy_identity_problem2(&u, &spec, 32).unwrap();
    let green = green_residual_problem2(&u, &spec, 32).unwrap();
    let gap = (report.signed_defect() + green).abs();
    checks.push((
        gap <= 1e-7 && report.defect > 1e-3,
        format!(
            "Green cross-check on a non-solution: gap {gap:.2e} <= 1e-7 (defect {:.3})",
            report.defect
        ),
    ));
    finish(5, start, 30.0, &checks);
}

#[test]
fn criterion_6_finite_difference_oracle() {
    let start = Instant::now();
    let spec = problem2(0.5, 0.5, C64::new(0.5, 0.0));
    let coarse = decay_check(1, 1, 0, &spec, &GridSpec::new(16, 16, 32).unwrap()).unwrap();
    // The time ratio needs the spatial error well below the temporal one.
    let fine_spec = problem2(1.0, 1.0, C64::new(0.5, 0.0));
    let fine = decay_check(1, 1, 0, &fine_spec, &GridSpec::new(128, 128, 8).unwrap()).unwrap();
    let ratio = fine.ratios[0];
    let mms = mms_check(&fine_spec, &GridSpec::new(8, 8, 8).unwrap(), 3).unwrap();
    finish(
        6,
        start,
        120.0,
        &[
            (
                coarse.error_l2() <= 0.05,
                format!(
                    "decay error {:.4} <= 0.05 on 16x16x32 (m = n = 0.5)",
                    coarse.error_l2()
                ),
            ),
            (
                (1.6..=2.4).contains(&ratio),
                format!("time-refinement ratio {ratio:.3} in [1.6, 2.4] on 128x128, nt 8/16"),
            ),
            (
                (1.7..=2.3).contains(&mms.order_estimate),
                format!("MMS spatial order {:.3} in [1.7, 2.3]", mms.order_estimate),
            ),
        ],
    );
}

#[test]
fn criterion_7_dispersion_consistency() {
    let start = Instant::now();
    let k = [1.0, -1.0, 1.0, 1.0, 1.0, -1.0];
    let mut clauses_hold = true;
    for lambda in [50.0 / 512.0, 1.0, 50.0] {
        let spec = ProblemSpec {
            m: 1.0,
            n: 1.0,
            alpha: C64::new(1.0, 0.0),
            lambda: C64::new(lambda, 0.0),
            variant: Variant::Problem3,
        };
        clauses_hold &= check_uniqueness_conditions(&spec, Some(k))
            .unwrap()
            .guaranteed;
    }
    let (mut positive_candidates, mut found, mut worst, mut all_verified) = (0, 0, 0.0f64, true);
    for s in -2..=2 {
        let problem = TransmissionProblem::new(k, 1.0, s).unwrap();
        let scan =
            scan_roots(Region::real_segment(50.0 / 512.0, 50.0), (512, 1), &problem).unwrap();
        positive_candidates += scan.candidates.len();
        let other = scan_roots(
            Region {
                re: (-60.0, 10.0),
                im: (-40.0, 40.0),
            },
            (141, 161),
            &problem,
        )
        .unwrap();
        for c in &other.candidates {
            found += 1;
            worst = worst.max(c.verification.max_residual());
            all_verified &= c.verification.passed && c.verification.max_residual() <= VERIFY_TOL;
        }
    }
    finish(
        7,
        start,
        60.0,
        &[
            (clauses_hold, "uniqueness clauses hold for k = (1,-1,1,1,1,-1), alpha = 1".into()),
            (positive_candidates == 0, format!("{positive_candidates} candidates on (0, 50], s in -2..2")),
            (
                found > 0 && all_verified,
                format!("{found} candidates off the positive axis verified, worst residual {worst:.2e} <= 1e-7"),
            ),
        ],
    );
}

/// Replaces every leaf of a JSON document with its type name.
fn skeleton(v: &Value) -> Value {
    match v {
        Value::Null => Value::from("null"),
        Value::Bool(_) => Value::from("bool"),
        Value::Number(_) => Value::from("number"),
        Value::String(_) => Value::from("string"),
        Value::Array(items) => Value::Array(items.iter().map(skeleton).collect()),
        Value::Object(map) => {
            Value::Object(map.iter().map(|(k, v)| (k.clone(), skeleton(v))).collect())
        }
    }
}

#[test]
fn criterion_8_cli_determinism_and_schema() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verify.json");
    let path_str = path.to_str().unwrap();
    let run = || {
        let cli = Cli::parse_from([
            "npl",
            "verify",
            "--variant",
            "problem2",
            "--m",
            "1",
            "--n",
            "1",
            "--alpha",
            "0.5+0i",
            "--k",
            "1",
            "--p",
            "1",
            "--s",
            "0",
            "--seed",
            "42",
            "--points",
            "8",
            "--output",
            path_str,
        ]);
        assert_eq!(execute(&cli), EXIT_OK);
        std::fs::read_to_string(&path).unwrap()
    };
    let without_timestamp = |text: &str| {
        text.lines()
            .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let (first, second) = (run(), run());
    let byte_identical = without_timestamp(&first) == without_timestamp(&second);
    let (a, b): (Value, Value) = (
        serde_json::from_str(&first).unwrap(),
        serde_json::from_str(&second).unwrap(),
    );
    let same_results = a["results"] == b["results"] && a["config"] == b["config"];
    let golden: Value =
        serde_json::from_str(include_str!("golden/verify_report.skeleton.json")).unwrap();
    let schema_ok = skeleton(&a) == golden;
    finish(
        8,
        start,
        30.0,
        &[
            (
                same_results && byte_identical,
                "repeated seeded runs identical apart from timestamp".into(),
            ),
            (
                schema_ok,
                "verify report matches golden JSON skeleton".into(),
            ),
        ],
    );
}
