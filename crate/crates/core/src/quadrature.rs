//! Tensor-product Gauss-Legendre quadrature on axis-aligned boxes.

use std::f64::consts::PI;

use crate::{Error, Result};

pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 64;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Result<Self> {
        if !(MIN_ORDER..=MAX_ORDER).contains(&order) {
            return Err(Error::InvalidInput(format!(
                "quadrature order must lie in {MIN_ORDER}..={MAX_ORDER}, got {order}"
            )));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Ok(GaussLegendre { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    pub fn integrate_2d<F: FnMut(f64, f64) -> f64>(
        &self,
        (a0, b0): (f64, f64),
        (a1, b1): (f64, f64),
        mut f: F,
    ) -> f64 {
        let outer: Vec<_> = self.mapped(a0, b0).collect();
        let inner: Vec<_> = self.mapped(a1, b1).collect();
        let mut total = 0.0;
        for &(x, wx) in &outer {
            let mut row = 0.0;
            for &(y, wy) in &inner {
                row += wy * f(x, y);
            }
            total += wx * row;
        }
        total
    }

    pub fn integrate_3d<F: FnMut(f64, f64, f64) -> f64>(
        &self,
        r0: (f64, f64),
        r1: (f64, f64),
        (a2, b2): (f64, f64),
        mut f: F,
    ) -> f64 {
        let third: Vec<_> = self.mapped(a2, b2).collect();
        self.integrate_2d(r0, r1, |x, y| {
            third.iter().map(|&(t, wt)| wt * f(x, y, t)).sum()
        })
    }
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor-product Gauss-Legendre integral of `f` over a box of dimension 1 to 3.
///
/// Exact for polynomials of degree `<= 2 order - 1` in each variable.
pub fn gauss_quad<F>(f: F, domain: &[(f64, f64)], order: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let rule = GaussLegendre::new(order)?;
    match *domain {
        [r0] => Ok(rule.integrate(r0.0, r0.1, |x| f(&[x]))),
        [r0, r1] => Ok(rule.integrate_2d(r0, r1, |x, y| f(&[x, y]))),
        [r0, r1, r2] => Ok(rule.integrate_3d(r0, r1, r2, |x, y, t| f(&[x, y, t]))),
        _ => Err(Error::InvalidInput(format!(
            "quadrature supports 1 to 3 dimensions, got {}",
            domain.len()
        ))),
    }
}
