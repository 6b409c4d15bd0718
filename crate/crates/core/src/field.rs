//! Smooth fields on the unit cube and their partial derivatives.

use crate::C64;

/// Value and the partial derivatives the governing operators need.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Partials {
    pub u: C64,
    pub ux: C64,
    pub uy: C64,
    pub ut: C64,
    pub uxx: C64,
    pub uyy: C64,
}

/// A complex field `u(x, y, t)`.
///
/// Two-variable fields (the first degenerate problem) ignore `t`.
/// Implementors that know their derivatives in closed form override
/// [`SmoothField::partials`]; everything else falls back to finite
/// differences.
pub trait SmoothField: Sync {
    fn value(&self, x: f64, y: f64, t: f64) -> C64;

    fn partials(&self, _x: f64, _y: f64, _t: f64) -> Option<Partials> {
        None
    }
}

impl<F> SmoothField for F
where
    F: Fn(f64, f64, f64) -> C64 + Sync,
{
    fn value(&self, x: f64, y: f64, t: f64) -> C64 {
        self(x, y, t)
    }
}

/// Default finite-difference step.
pub const FD_STEP: f64 = 1e-4;

/// Fourth-order finite differences of `f` on the box `[lo, hi]`.
///
/// Central stencils are used where the five-point stencil fits inside the
/// box, otherwise the matching one-sided fourth-order stencil.
pub fn fd_partials<F: SmoothField + ?Sized>(
    f: &F,
    point: [f64; 3],
    lo: [f64; 3],
    hi: [f64; 3],
    h: f64,
) -> Partials {
    let eval = |p: [f64; 3]| f.value(p[0], p[1], p[2]);
    let along = |axis: usize| -> (C64, C64) {
        let sample = |offset: f64| {
            let mut p = point;
            p[axis] += offset * h;
            eval(p)
        };
        let c = point[axis];
        if c - 2.0 * h >= lo[axis] && c + 2.0 * h <= hi[axis] {
            let (m2, m1, z, p1, p2) = (
                sample(-2.0),
                sample(-1.0),
                sample(0.0),
                sample(1.0),
                sample(2.0),
            );
            let d1 = (m2 - m1 * 8.0 + p1 * 8.0 - p2) / (12.0 * h);
            let d2 = (-m2 + m1 * 16.0 - z * 30.0 + p1 * 16.0 - p2) / (12.0 * h * h);
            (d1, d2)
        } else {
            let dir = if c - 2.0 * h < lo[axis] { 1.0 } else { -1.0 };
            let s: Vec<C64> = (0..6).map(|j| sample(dir * j as f64)).collect();
            let d1 = (s[0] * -25.0 + s[1] * 48.0 - s[2] * 36.0 + s[3] * 16.0 - s[4] * 3.0)
                / (12.0 * h)
                * dir;
            let d2 = (s[0] * 45.0 - s[1] * 154.0 + s[2] * 214.0 - s[3] * 156.0 + s[4] * 61.0
                - s[5] * 10.0)
                / (12.0 * h * h);
            (d1, d2)
        }
    };
    let (ux, uxx) = along(0);
    let (uy, uyy) = along(1);
    let (ut, _) = along(2);
    Partials {
        u: eval(point),
        ux,
        uy,
        ut,
        uxx,
        uyy,
    }
}

/// Closed-form partials when available, finite differences otherwise.
pub fn partials_or_fd<F: SmoothField + ?Sized>(
    f: &F,
    point: [f64; 3],
    lo: [f64; 3],
    hi: [f64; 3],
) -> Partials {
    f.partials(point[0], point[1], point[2])
        .unwrap_or_else(|| fd_partials(f, point, lo, hi, FD_STEP))
}
