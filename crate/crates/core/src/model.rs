//! Sources, groups and service times.
//!
//! `n` sources are split into `m = n / k` groups of `k`. Each cycle every
//! source draws an independent Bernoulli(`p`) status. A group with no positive
//! status is cleared by one aggregate update (1 slot); otherwise the aggregate
//! update is followed by one individual update per member (`k + 1` slots).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A validated `(n, p, k)` triple with the derived group count and the
/// probability that a whole group is negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    n: u32,
    p: f64,
    k: u32,
    m: u32,
    q: f64,
}

impl SystemConfig {
    pub fn new(n: u32, p: f64, k: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Range {
                name: "n",
                value: 0.0,
                range: "[1, inf)",
            });
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Range {
                name: "p",
                value: p,
                range: "[0, 1]",
            });
        }
        if k == 0 || k > n {
            return Err(Error::Range {
                name: "k",
                value: f64::from(k),
                range: "[1, n]",
            });
        }
        if !n.is_multiple_of(k) {
            return Err(Error::Divisibility { n, k });
        }
        Ok(Self {
            n,
            p,
            k,
            m: n / k,
            q: all_negative_probability(p, k),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of groups.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// `(1 - p)^k`, the probability that a group carries no positive status.
    pub fn q(&self) -> f64 {
        self.q
    }
}

/// Shorthand for [`SystemConfig::new`].
pub fn validate_config(n: u32, p: f64, k: u32) -> Result<SystemConfig> {
    SystemConfig::new(n, p, k)
}

/// `(1 - p)^k` evaluated as `exp(k * ln(1 - p))`, exact at both endpoints.
pub fn all_negative_probability(p: f64, k: u32) -> f64 {
    if p <= 0.0 {
        1.0
    } else if p >= 1.0 {
        0.0
    } else {
        (f64::from(k) * (-p).ln_1p()).exp()
    }
}

/// All divisors of `n` in increasing order.
pub fn divisors(n: u32) -> Vec<u32> {
    let mut low = Vec::new();
    let mut high = Vec::new();
    let mut d = 1u32;
    while u64::from(d) * u64::from(d) <= u64::from(n) {
        if n.is_multiple_of(d) {
            low.push(d);
            if d != n / d {
                high.push(n / d);
            }
        }
        d += 1;
    }
    low.extend(high.into_iter().rev());
    low
}

/// Status bits for one update cycle, stored group by group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatusMatrix {
    m: usize,
    k: usize,
    bits: Vec<bool>,
}

impl StatusMatrix {
    pub fn from_bits(m: usize, k: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != m * k {
            return Err(Error::LengthMismatch {
                expected: m * k,
                actual: bits.len(),
            });
        }
        Ok(Self { m, k, bits })
    }

    pub fn groups(&self) -> usize {
        self.m
    }

    pub fn group_size(&self) -> usize {
        self.k
    }

    /// Statuses of group `i` (0-based).
    pub fn group(&self, i: usize) -> &[bool] {
        &self.bits[i * self.k..(i + 1) * self.k]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

/// Draws one cycle of i.i.d. Bernoulli(p) statuses.
pub fn sample_statuses<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> StatusMatrix {
    let len = config.n() as usize;
    let p = config.p();
    let bits = (0..len).map(|_| rng.gen_bool(p)).collect();
    StatusMatrix {
        m: config.m() as usize,
        k: config.k() as usize,
        bits,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupOutcome {
    pub has_positive: bool,
    /// Slots needed to clear the whole group: 1 or `k + 1`.
    pub group_service_time: u32,
}

/// Outcome of serving one group of size `k`.
pub fn group_outcome(group_statuses: &[bool], k: u32) -> Result<GroupOutcome> {
    if group_statuses.len() != k as usize {
        return Err(Error::LengthMismatch {
            expected: k as usize,
            actual: group_statuses.len(),
        });
    }
    let has_positive = group_statuses.iter().any(|&x| x);
    Ok(GroupOutcome {
        has_positive,
        group_service_time: if has_positive { k + 1 } else { 1 },
    })
}

/// Service time of the `j`-th source (1-based) of a group of size `k`.
pub fn source_service_time(has_positive: bool, j: u32, k: u32) -> Result<u32> {
    if j == 0 || j > k {
        return Err(Error::IndexOutOfRange { j, k });
    }
    Ok(if has_positive { j + 1 } else { 1 })
}

/// Independent random stream `index` derived from `seed`.
///
/// Streams with the same seed and different indices never overlap, so
/// replications can be handed out without sharing a generator.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
