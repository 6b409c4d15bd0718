//! Command-line driver for `npl-core`: configuration loading, dispatch,
//! parallel sweeps and JSON/CSV reports.

pub mod config;
pub mod report;
pub mod run;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser};

use config::{Command, ConfigError, RunConfig};

/// Exit status for a completed run whose checks passed.
pub const EXIT_OK: i32 = 0;
/// A check exceeded its tolerance, or the computation failed.
pub const EXIT_FAILURE: i32 = 1;
/// Bad flags, config file or parameter values.
pub const EXIT_USAGE: i32 = 2;

/// Eigenmodes, energy identities, finite-difference oracles and dispersion
/// scans for degenerate parabolic problems with non-local initial conditions.
#[derive(Debug, Parser)]
#[command(name = "npl", version)]
pub struct Cli {
    pub command: Command,

    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub flags: Flags,
}

/// Every flag is read as text and parsed together with the config file.
#[derive(Debug, Args, Default)]
pub struct Flags {
    /// problem1, problem2 or problem3.
    #[arg(long, allow_hyphen_values = true)]
    pub variant: Option<String>,
    /// Degeneracy exponent in y.
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<String>,
    /// Degeneracy exponent in x.
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<String>,
    /// Non-local coefficient, e.g. `0.5+0i`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,
    /// Branch index of the complex logarithm.
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub kmax: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub pmax: Option<String>,
    /// Sweeps run s over `-smax..=smax`.
    #[arg(long, allow_hyphen_values = true)]
    pub smax: Option<String>,
    /// Comma-separated list of alpha values.
    #[arg(long, allow_hyphen_values = true)]
    pub alphas: Option<String>,
    /// Bessel order.
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub count: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub nx: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub ny: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub nt: Option<String>,
    #[arg(long = "t-end", allow_hyphen_values = true)]
    pub t_end: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub output: Option<String>,
    /// json or csv.
    #[arg(long, allow_hyphen_values = true)]
    pub format: Option<String>,
    #[arg(long = "quad-order", allow_hyphen_values = true)]
    pub quad_order: Option<String>,
    /// Seed for collocation points.
    #[arg(long, allow_hyphen_values = true)]
    pub seed: Option<String>,
    /// Number of collocation points.
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<String>,
    /// Refinement levels for the manufactured-solution check.
    #[arg(long, allow_hyphen_values = true)]
    pub levels: Option<String>,
    /// Six comma-separated coupling coefficients.
    #[arg(long = "k-coeffs", allow_hyphen_values = true)]
    pub k_coeffs: Option<String>,
    /// `re_lo,re_hi,im_lo,im_hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
    /// Samples along the real and imaginary axes, `n_re,n_im`.
    #[arg(long, allow_hyphen_values = true)]
    pub density: Option<String>,
    /// consistent or literal.
    #[arg(long, allow_hyphen_values = true)]
    pub convention: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub tolerance: Option<String>,
}

impl Flags {
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let entries = [
            ("variant", &self.variant),
            ("m", &self.m),
            ("n", &self.n),
            ("alpha", &self.alpha),
            ("lambda", &self.lambda),
            ("k", &self.k),
            ("p", &self.p),
            ("s", &self.s),
            ("kmax", &self.kmax),
            ("pmax", &self.pmax),
            ("smax", &self.smax),
            ("alphas", &self.alphas),
            ("nu", &self.nu),
            ("count", &self.count),
            ("nx", &self.nx),
            ("ny", &self.ny),
            ("nt", &self.nt),
            ("t_end", &self.t_end),
            ("output", &self.output),
            ("format", &self.format),
            ("quad_order", &self.quad_order),
            ("seed", &self.seed),
            ("points", &self.points),
            ("levels", &self.levels),
            ("k_coeffs", &self.k_coeffs),
            ("region", &self.region),
            ("density", &self.density),
            ("convention", &self.convention),
            ("tolerance", &self.tolerance),
        ];
        entries
            .into_iter()
            .filter_map(|(key, value)| value.as_ref().map(|v| (key.to_string(), v.clone())))
            .collect()
    }
}

/// Merges the config file (if any) with the flags, flags taking precedence.
pub fn load_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut pairs = match &cli.config {
        Some(path) => config::read_config_file(path)?,
        None => BTreeMap::new(),
    };
    pairs.extend(cli.flags.to_pairs());
    RunConfig::from_pairs(cli.command, &pairs)
}

/// Runs `cli` end to end and returns the process exit status.
pub fn execute(cli: &Cli) -> i32 {
    let config = match load_config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let outcome = match run::run(&config) {
        Ok(o) => o,
        Err(e @ run::RunError::Usage(_)) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
        Err(e @ run::RunError::Compute(_)) => {
            eprintln!("error: {e}");
            return EXIT_FAILURE;
        }
    };
    let report = report::Report::new(config, outcome.results);
    match report.emit(&outcome.table) {
        Ok(files) => {
            for f in files {
                eprintln!("wrote {}", f.display());
            }
        }
        Err(e) => {
            eprintln!("error: cannot write report: {e}");
            return EXIT_FAILURE;
        }
    }
    eprintln!(
        "{}: {} [{}]",
        report.config.command,
        outcome.summary,
        if outcome.passed { "pass" } else { "FAIL" }
    );
    if outcome.passed {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}
