//! Real Lambert W, branches `W_0` and `W_{-1}`.
//!
//! Both branches solve `x * exp(x) = y`. They meet at `y = -1/e` where
//! `x = -1`. `W_0` is defined on `[-1/e, inf)` and `W_{-1}` on `[-1/e, 0)`.
//!
//! Values are refined by Halley iteration from a branch-specific starting
//! point: the branch-point series near `-1/e`, a logarithmic asymptote for
//! `W_{-1}` near `0`, and `ln(1 + y)` or `ln y - ln ln y` for `W_0`.

use std::f64::consts::E;

use crate::error::{Error, Result};

const INV_E: f64 = 1.0 / E;
const MAX_ITERATIONS: usize = 100;
/// Accepted round-trip residual, relative to `|y|`.
const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Principal,
    MinusOne,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchValue {
    pub argument: f64,
    pub value: f64,
    pub branch: Branch,
}

impl BranchValue {
    pub fn new(argument: f64, branch: Branch) -> Result<Self> {
        let value = match branch {
            Branch::Principal => lambert_w0(argument)?,
            Branch::MinusOne => lambert_wm1(argument)?,
        };
        Ok(Self {
            argument,
            value,
            branch,
        })
    }
}

fn at_branch_point(y: f64) -> bool {
    (y + INV_E).abs() <= 4.0 * f64::EPSILON * INV_E
}

/// Principal branch, `W_0(y) >= -1`, for `y >= -1/e`.
pub fn lambert_w0(y: f64) -> Result<f64> {
    if y.is_nan() || (y < -INV_E && !at_branch_point(y)) || y.is_infinite() {
        return Err(Error::Domain(y));
    }
    if at_branch_point(y) {
        return Ok(-1.0);
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let guess = if E.mul_add(y, 1.0) < 0.3 {
        branch_point_series(y, 1.0)
    } else if y < E {
        y.ln_1p()
    } else {
        let l = y.ln();
        l - l.ln()
    };
    halley(y, guess.max(-1.0))
}

/// Lower branch, `W_{-1}(y) <= -1`, for `-1/e <= y < 0`.
pub fn lambert_wm1(y: f64) -> Result<f64> {
    if y.is_nan() || y >= 0.0 || (y < -INV_E && !at_branch_point(y)) {
        return Err(Error::Domain(y));
    }
    if at_branch_point(y) {
        return Ok(-1.0);
    }
    let guess = if E.mul_add(y, 1.0) < 0.3 {
        branch_point_series(y, -1.0)
    } else {
        let l1 = (-y).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };
    halley(y, guess.min(-1.0))
}

/// `-1 + s - s^2/3 + 11 s^3 / 72` with `s = sign * sqrt(2 (1 + e y))`.
fn branch_point_series(y: f64, sign: f64) -> f64 {
    let s = sign * (2.0 * E.mul_add(y, 1.0)).max(0.0).sqrt();
    -1.0 + s * (1.0 + s * (-1.0 / 3.0 + s * 11.0 / 72.0))
}

fn halley(y: f64, mut x: f64) -> Result<f64> {
    let residual = |x: f64| (x * x.exp() - y).abs();
    let mut best = (residual(x), x);
    for _ in 0..MAX_ITERATIONS {
        let ex = x.exp();
        let f = x * ex - y;
        if f == 0.0 {
            return Ok(x);
        }
        let wp1 = x + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let step = f / (ex * wp1 - (x + 2.0) * f / (2.0 * wp1));
        if !step.is_finite() {
            break;
        }
        x -= step;
        let r = residual(x);
        if r < best.0 {
            best = (r, x);
        }
        if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            break;
        }
    }
    if best.0 <= RESIDUAL_TOL * y.abs() {
        Ok(best.1)
    } else {
        Err(Error::Convergence(y))
    }
}
