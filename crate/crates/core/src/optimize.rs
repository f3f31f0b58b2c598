//! Group-size selection.
//!
//! Two objectives are compared over the divisors of `n`:
//!
//! - the average age ([`Metric::Age`]), searched exhaustively,
//! - the expected number of updates per cycle, i.e. the classic pooled-testing
//!   cost ([`Metric::ExpectedUpdates`]). Its continuous relaxation has
//!   stationary points given by the two real Lambert W branches, so only the
//!   divisors bracketing those points plus `1` and `n` need to be checked.

use crate::analytic::{average_age, expected_cycle_length, round_robin_age};
use crate::error::{Error, Result};
use crate::lambertw::{lambert_w0, lambert_wm1};
use crate::model::{divisors, SystemConfig};

/// Largest `p` for which the expected-updates objective has two stationary
/// points: `1 - exp(-4 / e^2)`.
pub fn two_root_limit() -> f64 {
    let e2 = std::f64::consts::E * std::f64::consts::E;
    -(-4.0 / e2).exp_m1()
}

/// Bisection tolerance in `p` for [`updating_efficiency_threshold`].
pub const THRESHOLD_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Age,
    ExpectedUpdates,
}

impl Metric {
    pub fn evaluate(self, config: &SystemConfig) -> f64 {
        match self {
            Metric::Age => average_age(config),
            Metric::ExpectedUpdates => expected_cycle_length(config),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub optimal_k: u32,
    /// `(k, objective)` for every candidate evaluated, ascending in `k`.
    pub candidates: Vec<(u32, f64)>,
    pub metric: Metric,
    pub objective_at_optimum: f64,
}

/// Roots of the derivative of the expected cycle length in `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPoints {
    /// Local minimum, from the principal branch.
    pub alpha1: f64,
    /// Local maximum, from the lower branch.
    pub alpha2: f64,
}

/// `1 - k^(-1/k)`: pooled testing with groups of `k` beats testing every
/// source individually whenever `p` is at most this value.
pub fn group_testing_efficiency_threshold(k: u32) -> f64 {
    let k = f64::from(k);
    -(-k.ln() / k).exp_m1()
}

/// Stationary points of `n/k + n(1 - (1-p)^k)` over real `k > 0`.
///
/// Returns `Ok(None)` when `p` exceeds [`two_root_limit`], where the
/// objective is decreasing in `k`.
pub fn stationary_group_sizes(p: f64) -> Result<Option<StationaryPoints>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Range {
            name: "p",
            value: p,
            range: "(0, 1)",
        });
    }
    if p > two_root_limit() {
        return Ok(None);
    }
    let log_q = (-p).ln_1p();
    let y = (-0.5 * (-log_q).sqrt()).max(-1.0 / std::f64::consts::E);
    let scale = 2.0 / log_q;
    Ok(Some(StationaryPoints {
        alpha1: scale * lambert_w0(y)?,
        alpha2: scale * lambert_wm1(y)?,
    }))
}

fn argmin(n: u32, p: f64, ks: &[u32], metric: Metric) -> Result<OptimizationResult> {
    let mut candidates = Vec::with_capacity(ks.len());
    for &k in ks {
        let config = SystemConfig::new(n, p, k)?;
        candidates.push((k, metric.evaluate(&config)));
    }
    candidates.sort_by_key(|&(k, _)| k);
    let (optimal_k, objective_at_optimum) = smallest_minimiser(&candidates);
    Ok(OptimizationResult {
        optimal_k,
        candidates,
        metric,
        objective_at_optimum,
    })
}

/// First entry attaining the minimum objective; with `candidates` sorted by
/// `k` this breaks ties toward the smaller group.
fn smallest_minimiser(candidates: &[(u32, f64)]) -> (u32, f64) {
    candidates
        .iter()
        .copied()
        .reduce(|best, cur| if cur.1 < best.1 { cur } else { best })
        .expect("divisor list is never empty")
}

/// Brute-force argmin of `metric` over every divisor of `n`.
pub fn exhaustive_search(n: u32, p: f64, metric: Metric) -> Result<OptimizationResult> {
    argmin(n, p, &divisors(n), metric)
}

/// Divisors of `n` adjacent to the real point `alpha`: the largest one not
/// above it and the smallest one not below it, clamped to `[1, n]`.
fn neighbouring_divisors(divs: &[u32], alpha: f64) -> [u32; 2] {
    let below = divs
        .iter()
        .rev()
        .copied()
        .find(|&d| f64::from(d) <= alpha)
        .unwrap_or(divs[0]);
    let above = divs
        .iter()
        .copied()
        .find(|&d| f64::from(d) >= alpha)
        .unwrap_or(divs[divs.len() - 1]);
    [below, above]
}

/// Group size minimising the expected number of updates per cycle.
///
/// Uses the candidate set `{1, n}` plus the divisors around both stationary
/// points. Falls back to the exhaustive search when the stationary points do
/// not exist.
pub fn optimal_group_size_testing(n: u32, p: f64) -> Result<OptimizationResult> {
    let divs = divisors(n);
    let roots = if p > 0.0 && p < 1.0 {
        stationary_group_sizes(p)?
    } else {
        None
    };
    let Some(roots) = roots else {
        return argmin(n, p, &divs, Metric::ExpectedUpdates);
    };
    let mut ks = vec![1, n];
    ks.extend(neighbouring_divisors(&divs, roots.alpha1));
    ks.extend(neighbouring_divisors(&divs, roots.alpha2));
    ks.sort_unstable();
    ks.dedup();
    argmin(n, p, &ks, Metric::ExpectedUpdates)
}

/// Group size minimising the average age, over every divisor of `n`.
pub fn optimal_group_size_updating(n: u32, p: f64) -> Result<OptimizationResult> {
    exhaustive_search(n, p, Metric::Age)
}

/// `min_k age(n, p, k) - (n/2 + 1)`; non-positive where group updating is at
/// least as good as round robin.
fn updating_margin(n: u32, p: f64) -> Result<f64> {
    Ok(optimal_group_size_updating(n, p)?.objective_at_optimum - round_robin_age(n))
}

/// Largest `p` at which the best group size still matches or beats
/// round-robin updating, found by bisection to [`THRESHOLD_TOLERANCE`].
///
/// Assumes the margin changes sign once on `[0, 1]`; both ends of the
/// bracket are checked before bisecting.
pub fn updating_efficiency_threshold(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Range {
            name: "n",
            value: f64::from(n),
            range: "[2, inf)",
        });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    if updating_margin(n, lo)? > 0.0 {
        return Err(Error::Bracket(format!(
            "n={n}: group updating loses at p=0"
        )));
    }
    if updating_margin(n, hi)? <= 0.0 {
        return Ok(1.0);
    }
    while hi - lo > THRESHOLD_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if updating_margin(n, mid)? <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KStarPoint {
    pub p: f64,
    pub k_updating: u32,
    pub k_testing: u32,
}

/// Both optimal group sizes for each `p`.
pub fn kstar_sweep(n: u32, p_values: &[f64]) -> Result<Vec<KStarPoint>> {
    p_values
        .iter()
        .map(|&p| {
            Ok(KStarPoint {
                p,
                k_updating: optimal_group_size_updating(n, p)?.optimal_k,
                k_testing: optimal_group_size_testing(n, p)?.optimal_k,
            })
        })
        .collect()
}
