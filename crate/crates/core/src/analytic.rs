//! Closed-form cycle moments and average age, plus two exact oracles.
//!
//! The cycle length `Y` is the sum of the `m` group service times, each equal
//! to 1 with probability `q` and `k + 1` otherwise. The average age is
//! `E[Y^2] / (2 E[Y]) + E[S]`, with `E[S]` the service time averaged over the
//! positions inside a group.

use crate::error::{Error, Result};
use crate::model::{group_outcome, source_service_time, SystemConfig};

/// Largest population the enumeration oracle accepts.
pub const ENUMERATION_LIMIT: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentSource {
    ClosedForm,
    ConvolutionOracle,
    EnumerationOracle,
    Simulation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    /// `E[Y]`
    pub mean_cycle: f64,
    /// `E[Y^2]`
    pub second_moment_cycle: f64,
    /// `E[S]`
    pub mean_service: f64,
    pub average_age: f64,
    pub source: MomentSource,
}

impl MomentSet {
    fn from_moments(mean_cycle: f64, second: f64, mean_service: f64, source: MomentSource) -> Self {
        Self {
            mean_cycle,
            second_moment_cycle: second,
            mean_service,
            average_age: age_from_moments(mean_cycle, second, mean_service),
            source,
        }
    }

    pub fn variance_cycle(&self) -> f64 {
        self.second_moment_cycle - self.mean_cycle * self.mean_cycle
    }
}

/// `E[Y^2] / (2 E[Y]) + E[S]`.
pub fn age_from_moments(mean_cycle: f64, second_moment_cycle: f64, mean_service: f64) -> f64 {
    second_moment_cycle / (2.0 * mean_cycle) + mean_service
}

/// `E[Y] = n/k + n(1 - q)`; also the expected number of tests per cycle.
pub fn expected_cycle_length(config: &SystemConfig) -> f64 {
    let n = f64::from(config.n());
    let k = f64::from(config.k());
    n / k + n * (1.0 - config.q())
}

/// `E[Y^2] = n(n-k)q^2 + n^2(k+1)^2/k^2 - n(2n(1 + 1/k) - k)q`.
///
/// Evaluated as `Var[Y] + E[Y]^2` with `Var[Y] = m k^2 q (1 - q)`, which is
/// the same polynomial in `q` but exact at `q = 0` and `q = 1`.
pub fn cycle_length_second_moment(config: &SystemConfig) -> f64 {
    let k = f64::from(config.k());
    let q = config.q();
    let mean = expected_cycle_length(config);
    f64::from(config.m()) * k * k * q * (1.0 - q) + mean * mean
}

/// `E[S_j] = 1 + j(1 - q)` for the `j`-th member (1-based) of a group.
pub fn expected_source_service(config: &SystemConfig, j: u32) -> Result<f64> {
    if j == 0 || j > config.k() {
        return Err(Error::IndexOutOfRange { j, k: config.k() });
    }
    Ok(1.0 + f64::from(j) * (1.0 - config.q()))
}

/// `E[S] = 1 + (k+1)(1 - q)/2`.
pub fn mean_service_time(config: &SystemConfig) -> f64 {
    1.0 + (f64::from(config.k()) + 1.0) * (1.0 - config.q()) / 2.0
}

/// Long-run average age over all sources.
pub fn average_age(config: &SystemConfig) -> f64 {
    age_from_moments(
        expected_cycle_length(config),
        cycle_length_second_moment(config),
        mean_service_time(config),
    )
}

/// All closed-form quantities at once.
pub fn closed_form_moments(config: &SystemConfig) -> MomentSet {
    MomentSet::from_moments(
        expected_cycle_length(config),
        cycle_length_second_moment(config),
        mean_service_time(config),
        MomentSource::ClosedForm,
    )
}

/// Average age of sequential one-at-a-time updating: `n/2 + 1`.
pub fn round_robin_age(n: u32) -> f64 {
    f64::from(n) / 2.0 + 1.0
}

/// Moments from the exact distribution of `Y = m + k * B`, where `B` is the
/// number of groups holding a positive status, `B ~ Binomial(m, 1 - q)`.
pub fn convolution_oracle(config: &SystemConfig) -> MomentSet {
    let m = config.m();
    let k = f64::from(config.k());
    let q = config.q();
    let mf = f64::from(m);

    let (mut mean, mut second) = (0.0, 0.0);
    for (b, prob) in binomial_pmf(m, 1.0 - q).into_iter().enumerate() {
        let y = mf + b as f64 * k;
        mean += prob * y;
        second += prob * y * y;
    }

    let mean_service = (1..=config.k())
        .map(|j| 1.0 + f64::from(j) * (1.0 - q))
        .sum::<f64>()
        / k;

    MomentSet::from_moments(mean, second, mean_service, MomentSource::ConvolutionOracle)
}

fn binomial_pmf(trials: u32, success: f64) -> Vec<f64> {
    let len = trials as usize + 1;
    if success <= 0.0 {
        let mut v = vec![0.0; len];
        v[0] = 1.0;
        return v;
    }
    if success >= 1.0 {
        let mut v = vec![0.0; len];
        v[trials as usize] = 1.0;
        return v;
    }
    let ln_s = success.ln();
    let ln_f = (-success).ln_1p();
    let mut ln_choose = 0.0;
    (0..=trials)
        .map(|b| {
            if b > 0 {
                ln_choose += f64::from(trials - b + 1).ln() - f64::from(b).ln();
            }
            (ln_choose + f64::from(b) * ln_s + f64::from(trials - b) * ln_f).exp()
        })
        .collect()
}

/// Moments by walking all `2^n` status vectors with their exact
/// probabilities and applying the service-time rules directly.
pub fn enumeration_oracle(config: &SystemConfig) -> Result<MomentSet> {
    let n = config.n();
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            n,
            max: ENUMERATION_LIMIT,
        });
    }
    let k = config.k();
    let p = config.p();
    let m = config.m() as usize;
    let ku = k as usize;

    let (mut mean, mut second, mut service) = (0.0, 0.0, 0.0);
    let mut group = vec![false; ku];
    for pattern in 0u32..(1u32 << n) {
        let ones = pattern.count_ones() as i32;
        let prob = p.powi(ones) * (1.0 - p).powi(n as i32 - ones);
        if prob == 0.0 {
            continue;
        }
        let mut cycle = 0u32;
        let mut service_sum = 0u32;
        for i in 0..m {
            for (j, bit) in group.iter_mut().enumerate() {
                *bit = pattern >> (i * ku + j) & 1 == 1;
            }
            let outcome = group_outcome(&group, k)?;
            cycle += outcome.group_service_time;
            for j in 1..=k {
                service_sum += source_service_time(outcome.has_positive, j, k)?;
            }
        }
        let y = f64::from(cycle);
        mean += prob * y;
        second += prob * y * y;
        service += prob * f64::from(service_sum) / f64::from(n);
    }

    Ok(MomentSet::from_moments(
        mean,
        second,
        service,
        MomentSource::EnumerationOracle,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{divisors, validate_config};

    fn cfg(n: u32, p: f64, k: u32) -> SystemConfig {
        validate_config(n, p, k).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
    }

    /// The fully expanded average-age expression, written out term by term.
    fn expanded_age(c: &SystemConfig) -> f64 {
        let n = f64::from(c.n());
        let k = f64::from(c.k());
        let q = c.q();
        (k * k * (n - k) * q * q + n * (k + 1.0) * (k + 1.0)) / (2.0 * k + 2.0 * k * k * (1.0 - q))
            - (2.0 * n * (k + 1.0) - k * k) * q / (2.0 + 2.0 * k * (1.0 - q))
            + 1.0
            + (k + 1.0) / 2.0 * (1.0 - q)
    }

    #[test]
    fn mean_cycle_examples() {
        assert_eq!(expected_cycle_length(&cfg(120, 0.0, 8)), 15.0);
        assert!(close(expected_cycle_length(&cfg(4, 0.5, 2)), 5.0, 1e-12));
        for p in [0.0, 0.1, 0.37, 1.0] {
            assert!(close(
                expected_cycle_length(&cfg(30, p, 1)),
                30.0 * (1.0 + p),
                1e-12
            ));
        }
    }

    /// Second moment exactly as the expanded polynomial in `q`.
    fn expanded_second_moment(c: &SystemConfig) -> f64 {
        let n = f64::from(c.n());
        let k = f64::from(c.k());
        let q = c.q();
        n * (n - k) * q * q + n * n * (k + 1.0) * (k + 1.0) / (k * k)
            - n * (2.0 * n * (1.0 + 1.0 / k) - k) * q
    }

    #[test]
    fn second_moment_matches_expanded_polynomial() {
        for n in [1u32, 4, 12, 48, 120, 360, 1200] {
            for k in divisors(n) {
                for step in 0..=20 {
                    let c = cfg(n, f64::from(step) / 20.0, k);
                    assert!(
                        close(
                            cycle_length_second_moment(&c),
                            expanded_second_moment(&c),
                            1e-9
                        ),
                        "n={n} k={k} step={step}"
                    );
                }
            }
        }
    }

    #[test]
    fn second_moment_examples() {
        assert!(close(
            cycle_length_second_moment(&cfg(120, 0.0, 8)),
            225.0,
            1e-12
        ));
        assert!(close(
            cycle_length_second_moment(&cfg(120, 1.0, 8)),
            120.0 * 120.0 * 81.0 / 64.0,
            1e-12
        ));
        assert!(close(
            cycle_length_second_moment(&cfg(4, 0.5, 2)),
            26.5,
            1e-12
        ));
    }

    #[test]
    fn source_service_examples() {
        assert_eq!(expected_source_service(&cfg(12, 0.0, 4), 3).unwrap(), 1.0);
        assert_eq!(expected_source_service(&cfg(12, 1.0, 4), 4).unwrap(), 5.0);
        assert!(close(
            expected_source_service(&cfg(4, 0.5, 2), 1).unwrap(),
            1.75,
            1e-12
        ));
        assert!(expected_source_service(&cfg(4, 0.5, 2), 3).is_err());
        assert!(expected_source_service(&cfg(4, 0.5, 2), 0).is_err());
    }

    #[test]
    fn mean_service_examples() {
        assert_eq!(mean_service_time(&cfg(12, 0.0, 4)), 1.0);
        assert_eq!(mean_service_time(&cfg(12, 1.0, 4)), 3.5);
        assert!(close(mean_service_time(&cfg(4, 0.5, 2)), 2.125, 1e-12));
        let c = cfg(60, 0.23, 6);
        let avg = (1..=6)
            .map(|j| expected_source_service(&c, j).unwrap())
            .sum::<f64>()
            / 6.0;
        assert!(close(mean_service_time(&c), avg, 1e-12));
    }

    #[test]
    fn age_examples() {
        assert!(close(average_age(&cfg(120, 0.0, 8)), 8.5, 1e-12));
        assert!(close(average_age(&cfg(4, 0.5, 2)), 4.775, 1e-12));
        let a = average_age(&cfg(120, 0.2, 3));
        assert!((a - 51.71).abs() < 0.01, "{a}");
        assert!(a < round_robin_age(120));
    }

    #[test]
    fn round_robin_values() {
        assert_eq!(round_robin_age(120), 61.0);
        assert_eq!(round_robin_age(2), 2.0);
        assert_eq!(round_robin_age(1200), 601.0);
    }

    #[test]
    fn expanded_form_matches_composition_on_grid() {
        let ns = [1u32, 2, 6, 12, 24, 48, 60, 120, 360, 1200];
        let mut points = 0;
        for &n in &ns {
            let ks = divisors(n);
            for &k in &ks {
                for step in 0..=20 {
                    let p = f64::from(step) / 20.0;
                    let c = cfg(n, p, k);
                    assert!(
                        close(average_age(&c), expanded_age(&c), 1e-9),
                        "n={n} k={k} p={p}"
                    );
                    points += 1;
                }
            }
        }
        assert!(points >= 1000, "{points}");
    }

    #[test]
    fn convolution_matches_closed_form() {
        for n in [4u32, 12, 48, 120, 1200] {
            for k in divisors(n) {
                for p in [0.0, 0.01, 0.05, 0.3, 0.7, 1.0] {
                    let c = cfg(n, p, k);
                    let o = convolution_oracle(&c);
                    let f = closed_form_moments(&c);
                    assert!(close(o.mean_cycle, f.mean_cycle, 1e-9), "n={n} k={k} p={p}");
                    assert!(
                        close(o.second_moment_cycle, f.second_moment_cycle, 1e-9),
                        "n={n} k={k} p={p}"
                    );
                    assert!(close(o.mean_service, f.mean_service, 1e-9));
                    assert!(close(o.average_age, f.average_age, 1e-9));
                }
            }
        }
    }

    #[test]
    fn convolution_small_case_and_deterministic_limit() {
        let o = convolution_oracle(&cfg(4, 0.5, 2));
        assert!(close(o.mean_cycle, 5.0, 1e-12));
        assert!(close(o.second_moment_cycle, 26.5, 1e-12));
        assert_eq!(o.source, MomentSource::ConvolutionOracle);

        let o = convolution_oracle(&cfg(12, 1.0, 3));
        assert_eq!(o.mean_cycle, 16.0);
        assert_eq!(o.second_moment_cycle, 256.0);
        assert_eq!(o.variance_cycle(), 0.0);
    }

    #[test]
    fn enumeration_examples() {
        let e = enumeration_oracle(&cfg(4, 0.5, 2)).unwrap();
        let o = convolution_oracle(&cfg(4, 0.5, 2));
        assert!(close(e.mean_cycle, o.mean_cycle, 1e-12));
        assert!(close(e.second_moment_cycle, o.second_moment_cycle, 1e-12));
        assert!(close(e.mean_service, o.mean_service, 1e-12));
        assert!(close(e.average_age, 4.775, 1e-12));

        let e = enumeration_oracle(&cfg(3, 0.0, 3)).unwrap();
        assert_eq!(e.mean_cycle, 1.0);
        assert_eq!(e.second_moment_cycle, 1.0);
        assert_eq!(e.average_age, 1.5);

        let e = enumeration_oracle(&cfg(2, 1.0, 2)).unwrap();
        assert_eq!(e.mean_cycle, 3.0);
        assert_eq!(e.second_moment_cycle, 9.0);

        assert_eq!(
            enumeration_oracle(&cfg(21, 0.1, 3)),
            Err(Error::TooLarge { n: 21, max: 20 })
        );
    }

    #[test]
    fn full_group_at_zero_probability() {
        for n in 1..=50 {
            assert_eq!(average_age(&cfg(n, 0.0, n)), 1.5);
        }
    }

    #[test]
    fn moment_set_invariants() {
        for n in [6u32, 24, 120] {
            for k in divisors(n) {
                for step in 0..=10 {
                    let p = f64::from(step) / 10.0;
                    let c = cfg(n, p, k);
                    let f = closed_form_moments(&c);
                    let m = f64::from(c.m());
                    assert!(f.variance_cycle() >= -1e-9 * f.second_moment_cycle);
                    assert!(f.mean_cycle >= m - 1e-9);
                    assert!(f.mean_cycle <= m * (f64::from(k) + 1.0) + 1e-9);
                    assert!(f.average_age.is_finite());
                }
            }
        }
    }
}
