use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("{func} did not converge to {target:e} within {terms} terms (x = {x})")]
    Convergence {
        func: &'static str,
        x: f64,
        terms: usize,
        target: f64,
    },

    #[error("no sign change bracketing zero {k} of J_{nu}")]
    Bracket { nu: f64, k: usize },

    #[error("parity violation: (-1)^{p} does not match the sign of alpha = {alpha}")]
    Parity { p: u32, alpha: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("iterative solver stopped after {iterations} iterations with relative residual {residual:e}")]
    SolverDiverged { iterations: usize, residual: f64 },
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }
}
