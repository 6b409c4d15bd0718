//! Run configuration: a flat `key = value` file merged with command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use clap::ValueEnum;
use npl_core::modes::{Convention, Variant};
use npl_core::C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable overriding the default quadrature order.
pub const QUAD_ORDER_ENV: &str = "NPL_QUAD_ORDER";
pub const DEFAULT_QUAD_ORDER: usize = 32;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("malformed value for `{key}`: {value:?} ({reason})")]
    Malformed {
        key: String,
        value: String,
        reason: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read config file {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Roots,
    Modes,
    Verify,
    Energy,
    Decay,
    Mms,
    Dispersion,
    Sweep,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.to_possible_value().expect("no skipped variants");
        f.write_str(name.get_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Every key a config file or flag set may carry.
pub const KNOWN_KEYS: &[&str] = &[
    "command",
    "variant",
    "m",
    "n",
    "alpha",
    "lambda",
    "k",
    "p",
    "s",
    "kmax",
    "pmax",
    "smax",
    "alphas",
    "nu",
    "count",
    "nx",
    "ny",
    "nt",
    "t_end",
    "output",
    "format",
    "quad_order",
    "seed",
    "points",
    "levels",
    "k_coeffs",
    "region",
    "density",
    "convention",
    "tolerance",
];

/// Fully resolved configuration. Keys that a command does not use stay `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub variant: Option<Variant>,
    pub m: Option<f64>,
    pub n: Option<f64>,
    pub alpha: Option<C64>,
    pub lambda: Option<C64>,
    pub k: Option<usize>,
    pub p: Option<usize>,
    pub s: Option<i64>,
    pub kmax: Option<usize>,
    pub pmax: Option<usize>,
    pub smax: Option<i64>,
    pub alphas: Option<Vec<C64>>,
    pub nu: Option<f64>,
    pub count: Option<usize>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub nt: Option<usize>,
    pub t_end: Option<f64>,
    pub output_path: Option<String>,
    pub format: Format,
    pub quad_order: usize,
    pub seed: u64,
    pub points: Option<usize>,
    pub levels: Option<usize>,
    pub k_coeffs: Option<[f64; 6]>,
    /// `[re_lo, re_hi, im_lo, im_hi]`.
    pub region: Option<[f64; 4]>,
    /// Samples along the real and imaginary axes.
    pub density: Option<[usize; 2]>,
    pub convention: Convention,
    pub tolerance: Option<f64>,
}

/// Parses a flat `key = value` text. Blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Malformed {
                key: format!("line {}", lineno + 1),
                value: raw.to_string(),
                reason: "expected `key = value`".into(),
            });
        };
        let key = key.trim().replace('-', "_");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse_pairs(&text)
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse::<T>()
        .map_err(|e| ConfigError::Malformed {
            key: key.to_string(),
            value: value.to_string(),
            reason: e.to_string(),
        })
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    value.split(',').map(|item| parse(key, item)).collect()
}

fn parse_array<T: FromStr + Copy + Default, const N: usize>(
    key: &str,
    value: &str,
) -> Result<[T; N], ConfigError>
where
    T::Err: fmt::Display,
{
    let items: Vec<T> = parse_list(key, value)?;
    items
        .try_into()
        .map_err(|items: Vec<T>| ConfigError::Malformed {
            key: key.to_string(),
            value: value.to_string(),
            reason: format!("expected {N} comma-separated values, got {}", items.len()),
        })
}

fn format_complex(z: C64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

struct Pairs<'a> {
    map: &'a BTreeMap<String, String>,
}

impl Pairs<'_> {
    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.map.get(key).map(|v| parse(key, v)).transpose()
    }
}

impl RunConfig {
    /// Builds and validates a config from merged pairs.
    ///
    /// `quad_order` falls back to [`QUAD_ORDER_ENV`] and then to
    /// [`DEFAULT_QUAD_ORDER`].
    pub fn from_pairs(
        command: Command,
        map: &BTreeMap<String, String>,
    ) -> Result<Self, ConfigError> {
        if let Some(key) = map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(ConfigError::UnknownKey(key.clone()));
        }
        if let Some(named) = map.get("command") {
            let named: Command =
                Command::from_str(named, true).map_err(|reason| ConfigError::Malformed {
                    key: "command".into(),
                    value: named.clone(),
                    reason,
                })?;
            if named != command {
                return Err(ConfigError::Invalid(format!(
                    "config file is for `{named}` but `{command}` was requested"
                )));
            }
        }
        let pairs = Pairs { map };
        let quad_order = match pairs.get::<usize>("quad_order")? {
            Some(q) => q,
            None => match std::env::var(QUAD_ORDER_ENV) {
                Ok(v) => parse(QUAD_ORDER_ENV, &v)?,
                Err(_) => DEFAULT_QUAD_ORDER,
            },
        };
        let format = match map.get("format") {
            Some(v) => Format::from_str(v, true).map_err(|reason| ConfigError::Malformed {
                key: "format".into(),
                value: v.clone(),
                reason,
            })?,
            None => Format::Json,
        };
        let convention = match map.get("convention").map(String::as_str) {
            None | Some("consistent") => Convention::Consistent,
            Some("literal") => Convention::Literal,
            Some(other) => {
                return Err(ConfigError::Malformed {
                    key: "convention".into(),
                    value: other.into(),
                    reason: "expected `consistent` or `literal`".into(),
                })
            }
        };
        let config = RunConfig {
            command,
            variant: pairs.get("variant")?,
            m: pairs.get("m")?,
            n: pairs.get("n")?,
            alpha: pairs.get("alpha")?,
            lambda: pairs.get("lambda")?,
            k: pairs.get("k")?,
            p: pairs.get("p")?,
            s: pairs.get("s")?,
            kmax: pairs.get("kmax")?,
            pmax: pairs.get("pmax")?,
            smax: pairs.get("smax")?,
            alphas: map
                .get("alphas")
                .map(|v| parse_list("alphas", v))
                .transpose()?,
            nu: pairs.get("nu")?,
            count: pairs.get("count")?,
            nx: pairs.get("nx")?,
            ny: pairs.get("ny")?,
            nt: pairs.get("nt")?,
            t_end: pairs.get("t_end")?,
            output_path: map.get("output").cloned(),
            format,
            quad_order,
            seed: pairs.get("seed")?.unwrap_or(0),
            points: pairs.get("points")?,
            levels: pairs.get("levels")?,
            k_coeffs: map
                .get("k_coeffs")
                .map(|v| parse_array("k_coeffs", v))
                .transpose()?,
            region: map
                .get("region")
                .map(|v| parse_array("region", v))
                .transpose()?,
            density: map
                .get("density")
                .map(|v| parse_array("density", v))
                .transpose()?,
            convention,
            tolerance: pairs.get("tolerance")?,
        };
        config.resolve()
    }

    /// Fills command defaults and checks required keys.
    fn resolve(mut self) -> Result<Self, ConfigError> {
        use Command::*;
        match self.command {
            Roots => {
                require(self.nu, "nu")?;
                require(self.count, "count")?;
            }
            Modes => {
                self.variant.get_or_insert(Variant::Problem2);
                self.require_problem()?;
                require(self.kmax, "kmax")?;
                require(self.pmax, "pmax")?;
                self.smax.get_or_insert(0);
            }
            Verify => {
                self.variant.get_or_insert(Variant::Problem2);
                self.require_problem()?;
                require(self.k, "k")?;
                require(self.p, "p")?;
                self.s.get_or_insert(0);
                self.points.get_or_insert(64);
                self.tolerance.get_or_insert(1e-8);
            }
            Energy => {
                self.variant.get_or_insert(Variant::Problem2);
                self.require_problem()?;
                require(self.k, "k")?;
                require(self.p, "p")?;
                self.s.get_or_insert(0);
            }
            Decay => {
                self.variant.get_or_insert(Variant::Problem2);
                self.require_problem()?;
                require(self.k, "k")?;
                require(self.p, "p")?;
                self.s.get_or_insert(0);
                self.require_grid()?;
                self.tolerance.get_or_insert(0.05);
            }
            Mms => {
                self.variant.get_or_insert(Variant::Problem2);
                require(self.m, "m")?;
                require(self.n, "n")?;
                self.alpha.get_or_insert(C64::new(1.0, 0.0));
                self.lambda.get_or_insert(C64::new(0.0, 0.0));
                self.require_grid()?;
                self.levels.get_or_insert(3);
            }
            Dispersion => {
                self.variant.get_or_insert(Variant::Problem3);
                require(self.k_coeffs, "k_coeffs")?;
                require(self.alpha, "alpha")?;
                require(self.region, "region")?;
                require(self.density, "density")?;
                self.s.get_or_insert(0);
            }
            Sweep => {
                self.variant.get_or_insert(Variant::Problem2);
                self.m.get_or_insert(1.0);
                self.n.get_or_insert(1.0);
                require(self.alphas.as_ref(), "alphas")?;
                require(self.kmax, "kmax")?;
                require(self.pmax, "pmax")?;
                self.smax.get_or_insert(0);
            }
        }
        self.validate()?;
        Ok(self)
    }

    fn require_problem(&self) -> Result<(), ConfigError> {
        require(self.m, "m")?;
        require(self.n, "n")?;
        require(self.alpha, "alpha")?;
        Ok(())
    }

    fn require_grid(&mut self) -> Result<(), ConfigError> {
        require(self.nx, "nx")?;
        let nx = self.nx.expect("checked");
        self.ny.get_or_insert(nx);
        require(self.nt, "nt")?;
        self.t_end.get_or_insert(1.0);
        Ok(())
    }

    /// Value checks that do not depend on which keys are present.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let alphas = self.alpha.iter().chain(self.alphas.iter().flatten());
        for a in alphas {
            if a.norm() == 0.0 || !a.is_finite() {
                return Err(ConfigError::Invalid(format!(
                    "alpha must be nonzero and finite, got {a}"
                )));
            }
        }
        for (key, v) in [("m", self.m), ("n", self.n)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(ConfigError::Invalid(format!(
                        "{key} must be positive, got {v}"
                    )));
                }
            }
        }
        if matches!(
            self.variant,
            Some(Variant::Problem1) | Some(Variant::Problem3)
        ) {
            if let Some(a) = self.alpha {
                if a.im != 0.0 {
                    return Err(ConfigError::Invalid(format!(
                        "{} requires a real alpha, got {a}",
                        self.variant.expect("matched")
                    )));
                }
            }
        }
        if !(2..=64).contains(&self.quad_order) {
            return Err(ConfigError::Invalid(format!(
                "quad_order must lie in 2..=64, got {}",
                self.quad_order
            )));
        }
        if let Some([a, b, c, d]) = self.region {
            if !(a <= b && c <= d) {
                return Err(ConfigError::Invalid(format!(
                    "region [{a}, {b}] x [{c}, {d}] is empty"
                )));
            }
        }
        if self.smax.is_some_and(|s| s < 0) {
            return Err(ConfigError::Invalid("smax must be nonnegative".into()));
        }
        Ok(())
    }

    /// The pairs that reproduce this config through [`RunConfig::from_pairs`].
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        let mut put = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                map.insert(key.to_string(), v);
            }
        };
        put("command", Some(self.command.to_string()));
        put("variant", self.variant.map(|v| v.to_string()));
        put("m", self.m.map(|v| v.to_string()));
        put("n", self.n.map(|v| v.to_string()));
        put("alpha", self.alpha.map(format_complex));
        put("lambda", self.lambda.map(format_complex));
        put("k", self.k.map(|v| v.to_string()));
        put("p", self.p.map(|v| v.to_string()));
        put("s", self.s.map(|v| v.to_string()));
        put("kmax", self.kmax.map(|v| v.to_string()));
        put("pmax", self.pmax.map(|v| v.to_string()));
        put("smax", self.smax.map(|v| v.to_string()));
        put(
            "alphas",
            self.alphas.as_ref().map(|a| {
                a.iter()
                    .map(|z| format_complex(*z))
                    .collect::<Vec<_>>()
                    .join(",")
            }),
        );
        put("nu", self.nu.map(|v| v.to_string()));
        put("count", self.count.map(|v| v.to_string()));
        put("nx", self.nx.map(|v| v.to_string()));
        put("ny", self.ny.map(|v| v.to_string()));
        put("nt", self.nt.map(|v| v.to_string()));
        put("t_end", self.t_end.map(|v| v.to_string()));
        put("output", self.output_path.clone());
        put(
            "format",
            Some(match self.format {
                Format::Json => "json".into(),
                Format::Csv => "csv".into(),
            }),
        );
        put("quad_order", Some(self.quad_order.to_string()));
        put("seed", Some(self.seed.to_string()));
        put("points", self.points.map(|v| v.to_string()));
        put("levels", self.levels.map(|v| v.to_string()));
        put("k_coeffs", self.k_coeffs.map(|v| join(&v)));
        put("region", self.region.map(|v| join(&v)));
        put("density", self.density.map(|v| join(&v)));
        put(
            "convention",
            Some(match self.convention {
                Convention::Consistent => "consistent".into(),
                Convention::Literal => "literal".into(),
            }),
        );
        put("tolerance", self.tolerance.map(|v| v.to_string()));
        map
    }
}

fn require<T>(value: Option<T>, key: &'static str) -> Result<T, ConfigError> {
    value.ok_or(ConfigError::MissingKey(key))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(items: &[(&str, &str)]) -> BTreeMap<String, String> {
        items
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn minimal_modes_flags() {
        let c = RunConfig::from_pairs(
            Command::Modes,
            &pairs(&[
                ("m", "1"),
                ("n", "1"),
                ("alpha", "0.5+0i"),
                ("kmax", "3"),
                ("pmax", "3"),
            ]),
        )
        .unwrap();
        assert_eq!(c.variant, Some(Variant::Problem2));
        assert_eq!(c.alpha, Some(C64::new(0.5, 0.0)));
        assert_eq!(c.smax, Some(0));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_pairs("m = 1\nfoo = 2\n").unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey("foo".into()));
        assert!(err.to_string().contains("foo"));
    }

    #[test]
    fn zero_alpha_rejected() {
        let err = RunConfig::from_pairs(
            Command::Modes,
            &pairs(&[
                ("m", "1"),
                ("n", "1"),
                ("alpha", "0+0i"),
                ("kmax", "3"),
                ("pmax", "3"),
            ]),
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)));
    }

    #[test]
    fn missing_key_is_named() {
        let err = RunConfig::from_pairs(Command::Roots, &pairs(&[("nu", "0.5")])).unwrap_err();
        assert_eq!(err, ConfigError::MissingKey("count"));
    }

    #[test]
    fn malformed_values() {
        assert!(matches!(
            RunConfig::from_pairs(Command::Roots, &pairs(&[("nu", "half"), ("count", "3")])),
            Err(ConfigError::Malformed { .. })
        ));
        assert!(matches!(
            RunConfig::from_pairs(
                Command::Dispersion,
                &pairs(&[
                    ("k_coeffs", "1,2,3"),
                    ("alpha", "1"),
                    ("region", "0,1,0,0"),
                    ("density", "8,1")
                ])
            ),
            Err(ConfigError::Malformed { .. })
        ));
        assert!(parse_pairs("just words").is_err());
    }

    #[test]
    fn file_comments_and_dashes() {
        let map = parse_pairs("# header\nquad-order = 16  # trailing\n\nseed=4").unwrap();
        assert_eq!(map.get("quad_order").map(String::as_str), Some("16"));
        assert_eq!(map.get("seed").map(String::as_str), Some("4"));
    }

    #[test]
    fn pairs_round_trip() {
        let c = RunConfig::from_pairs(
            Command::Dispersion,
            &pairs(&[
                ("k_coeffs", "1,-1,1,1,1,-1"),
                ("alpha", "1"),
                ("region", "0.1,50,0,0"),
                ("density", "512,1"),
                ("s", "-2"),
                ("quad_order", "16"),
            ]),
        )
        .unwrap();
        assert_eq!(RunConfig::from_pairs(c.command, &c.to_pairs()).unwrap(), c);
        let sweep = RunConfig::from_pairs(
            Command::Sweep,
            &pairs(&[
                ("alphas", "0.3,0.5+0.1i,-0.9"),
                ("kmax", "2"),
                ("pmax", "2"),
                ("smax", "1"),
            ]),
        )
        .unwrap();
        assert_eq!(
            RunConfig::from_pairs(sweep.command, &sweep.to_pairs()).unwrap(),
            sweep
        );
    }

    #[test]
    fn mismatched_command_rejected() {
        let err = RunConfig::from_pairs(
            Command::Roots,
            &pairs(&[("command", "modes"), ("nu", "0.5"), ("count", "2")]),
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)));
    }
}
