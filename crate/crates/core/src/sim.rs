//! Monte Carlo simulation of the group updating timeline.
//!
//! Cycles run back to back. Within a cycle groups are served in order; the
//! updates of group `i` are all generated when its service window opens and
//! source `j` of that group is delivered `S_ij` slots later, at which point
//! its age drops to `S_ij`.
//!
//! Ages are estimated per source with the renewal-reward ratio
//!
//! ```text
//!   sum_l (Y_l^2 / 2 + Y_l * S_l) / sum_l Y_l
//! ```
//!
//! where `Y_l` is the time between the generation of consecutive updates of
//! the source and `S_l` the service time of the later one. The first cycle
//! only opens the first interval, so `N` cycles give `N - 1` intervals.
//!
//! All interval quantities are integers and are accumulated exactly, so a
//! full [`CycleTrace`] and the streaming [`AgeAccumulator`] produce identical
//! estimates for the same seed.

use std::thread;

use rand::Rng;

use crate::analytic::{age_from_moments, MomentSet, MomentSource};
use crate::error::{Error, Result};
use crate::model::{group_outcome, sample_statuses, source_service_time, stream, SystemConfig};

/// Cycles required by [`cross_term_check`].
pub const MIN_CROSS_TERM_CYCLES: usize = 1000;

/// Draws one cycle and writes the group and per-source service times.
fn draw_cycle<R: Rng + ?Sized>(
    config: &SystemConfig,
    rng: &mut R,
    group_times: &mut [u32],
    service_times: &mut [u32],
) {
    let k = config.k();
    let ku = k as usize;
    let statuses = sample_statuses(config, rng);
    for (i, w) in group_times.iter_mut().enumerate() {
        let outcome = group_outcome(statuses.group(i), k).expect("group has k members");
        *w = outcome.group_service_time;
        for (j, s) in service_times[i * ku..(i + 1) * ku].iter_mut().enumerate() {
            *s = source_service_time(outcome.has_positive, j as u32 + 1, k)
                .expect("index within group");
        }
    }
}

/// A full simulated realization, stored cycle-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleTrace {
    config: SystemConfig,
    seed: u64,
    num_cycles: usize,
    group_times: Vec<u32>,
    service_times: Vec<u32>,
    cycle_lengths: Vec<u32>,
}

impl CycleTrace {
    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_cycles(&self) -> usize {
        self.num_cycles
    }

    /// `W_i` for every group of cycle `cycle` (0-based).
    pub fn group_times(&self, cycle: usize) -> &[u32] {
        let m = self.config.m() as usize;
        &self.group_times[cycle * m..(cycle + 1) * m]
    }

    /// `S_ij` for every source of cycle `cycle`, group by group.
    pub fn service_times(&self, cycle: usize) -> &[u32] {
        let n = self.config.n() as usize;
        &self.service_times[cycle * n..(cycle + 1) * n]
    }

    pub fn cycle_lengths(&self) -> &[u32] {
        &self.cycle_lengths
    }

    /// Slot offsets, from the start of the cycle, at which each group's
    /// service window opens.
    pub fn group_starts(&self, cycle: usize) -> Vec<u32> {
        self.group_times(cycle)
            .iter()
            .scan(0u32, |acc, &w| {
                let start = *acc;
                *acc += w;
                Some(start)
            })
            .collect()
    }

    /// Delivery instant of each source relative to the start of the cycle.
    pub fn delivery_offsets(&self, cycle: usize) -> Vec<u32> {
        let k = self.config.k() as usize;
        let starts = self.group_starts(cycle);
        self.service_times(cycle)
            .iter()
            .enumerate()
            .map(|(s, &service)| starts[s / k] + service)
            .collect()
    }

    /// Absolute start time of every cycle.
    pub fn cycle_starts(&self) -> Vec<u64> {
        self.cycle_lengths
            .iter()
            .scan(0u64, |acc, &y| {
                let start = *acc;
                *acc += u64::from(y);
                Some(start)
            })
            .collect()
    }
}

/// Simulates `num_cycles` independent cycles with the stream derived from
/// `seed`.
pub fn simulate_cycles(config: &SystemConfig, num_cycles: usize, seed: u64) -> CycleTrace {
    let m = config.m() as usize;
    let n = config.n() as usize;
    let mut rng = stream(seed, 0);
    let mut group_times = vec![0u32; num_cycles * m];
    let mut service_times = vec![0u32; num_cycles * n];
    let mut cycle_lengths = Vec::with_capacity(num_cycles);
    for cycle in 0..num_cycles {
        let groups = &mut group_times[cycle * m..(cycle + 1) * m];
        draw_cycle(
            config,
            &mut rng,
            groups,
            &mut service_times[cycle * n..(cycle + 1) * n],
        );
        cycle_lengths.push(groups.iter().sum());
    }
    CycleTrace {
        config: *config,
        seed,
        num_cycles,
        group_times,
        service_times,
        cycle_lengths,
    }
}

/// Exact per-source and per-interval sums for the renewal estimator.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct SourceSums {
    y: u64,
    y2: u64,
    s: u64,
    s2: u64,
    ys: u64,
    /// `sum (Y^2 + 2 Y S)`, twice the area under the age curve.
    twice_area: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct PooledSums {
    intervals: u64,
    aa: u128,
    ay: u128,
    yy: u128,
    a: u128,
    y: u128,
    lag_aa: u128,
    lag_ay: u128,
    lag_ya: u128,
    lag_yy: u128,
    prev: Option<(u128, u128)>,
}

impl PooledSums {
    fn push(&mut self, a: u128, y: u128) {
        self.intervals += 1;
        self.a += a;
        self.y += y;
        self.aa += a * a;
        self.ay += a * y;
        self.yy += y * y;
        if let Some((pa, py)) = self.prev {
            self.lag_aa += pa * a;
            self.lag_ay += pa * y;
            self.lag_ya += py * a;
            self.lag_yy += py * y;
        }
        self.prev = Some((a, y));
    }

    /// Delta-method standard error of the pooled ratio `sum a / (2 sum y)`,
    /// with the lag-one autocovariance included since consecutive intervals
    /// share one cycle's draws.
    fn standard_error(&self) -> f64 {
        if self.intervals < 2 || self.y == 0 {
            return 0.0;
        }
        let ratio = self.a as f64 / self.y as f64;
        let sq = self.aa as f64 - 2.0 * ratio * self.ay as f64 + ratio * ratio * self.yy as f64;
        let lag = self.lag_aa as f64 - ratio * (self.lag_ay as f64 + self.lag_ya as f64)
            + ratio * ratio * self.lag_yy as f64;
        let var = (sq + 2.0 * lag).max(0.0);
        var.sqrt() / (2.0 * self.y as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct RenewalSums {
    sources: Vec<SourceSums>,
    pooled: PooledSums,
}

impl RenewalSums {
    fn new(n: usize) -> Self {
        Self {
            sources: vec![SourceSums::default(); n],
            pooled: PooledSums::default(),
        }
    }

    fn record_interval(&mut self, source: usize, y: u64, s: u64) -> u64 {
        let t = &mut self.sources[source];
        let twice_area = y * y + 2 * y * s;
        t.y += y;
        t.y2 += y * y;
        t.s += s;
        t.s2 += s * s;
        t.ys += y * s;
        t.twice_area += twice_area;
        twice_area
    }

    fn max_abs_correlation(&self, intervals: u64) -> f64 {
        if intervals == 0 {
            return 0.0;
        }
        let count = intervals as f64;
        self.sources
            .iter()
            .map(|t| {
                let (ey, es) = (t.y as f64 / count, t.s as f64 / count);
                let var_y = t.y2 as f64 / count - ey * ey;
                let var_s = t.s2 as f64 / count - es * es;
                let cov = t.ys as f64 / count - ey * es;
                let scale = var_y * var_s;
                if var_y <= 1e-12 * ey * ey || var_s <= 1e-12 * es * es || scale <= 0.0 {
                    0.0
                } else {
                    (cov / scale.sqrt()).abs()
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Time-average age estimates from one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct AgeSummary {
    m: usize,
    k: usize,
    /// Estimated age of each source, group by group.
    pub per_source_age: Vec<f64>,
    pub overall_age: f64,
    pub standard_error: f64,
    pub num_cycles: usize,
    pub seed: u64,
}

impl AgeSummary {
    fn from_sums(config: &SystemConfig, sums: &RenewalSums, num_cycles: usize, seed: u64) -> Self {
        let per_source_age: Vec<f64> = sums
            .sources
            .iter()
            .map(|t| t.twice_area as f64 / (2.0 * t.y as f64))
            .collect();
        let overall_age = per_source_age.iter().sum::<f64>() / per_source_age.len() as f64;
        Self {
            m: config.m() as usize,
            k: config.k() as usize,
            per_source_age,
            overall_age,
            standard_error: sums.pooled.standard_error(),
            num_cycles,
            seed,
        }
    }

    /// Estimated age of source `j` in group `i` (both 1-based).
    pub fn source_age(&self, i: usize, j: usize) -> f64 {
        assert!((1..=self.m).contains(&i) && (1..=self.k).contains(&j));
        self.per_source_age[(i - 1) * self.k + (j - 1)]
    }
}

/// Streaming counterpart of [`CycleTrace`] + [`empirical_average_age`]: keeps
/// only running sums.
#[derive(Debug, Clone)]
pub struct AgeAccumulator {
    config: SystemConfig,
    seed: u64,
    cycles: usize,
    clock: u64,
    last_generation: Vec<u64>,
    sums: RenewalSums,
    cycle_sum: u128,
    cycle_sq_sum: u128,
    service_sum: u128,
    group_starts: Vec<u32>,
}

impl AgeAccumulator {
    pub fn new(config: &SystemConfig, seed: u64) -> Self {
        let n = config.n() as usize;
        Self {
            config: *config,
            seed,
            cycles: 0,
            clock: 0,
            last_generation: vec![0; n],
            sums: RenewalSums::new(n),
            cycle_sum: 0,
            cycle_sq_sum: 0,
            service_sum: 0,
            group_starts: vec![0; config.m() as usize],
        }
    }

    /// Adds one cycle given its group and per-source service times.
    pub fn push_cycle(&mut self, group_times: &[u32], service_times: &[u32]) {
        let k = self.config.k() as usize;
        let mut offset = 0u32;
        for (start, &w) in self.group_starts.iter_mut().zip(group_times) {
            *start = offset;
            offset += w;
        }
        let (mut a, mut y_total) = (0u128, 0u128);
        for (source, &s) in service_times.iter().enumerate() {
            let generated = self.clock + u64::from(self.group_starts[source / k]);
            if self.cycles > 0 {
                let y = generated - self.last_generation[source];
                a += u128::from(self.sums.record_interval(source, y, u64::from(s)));
                y_total += u128::from(y);
            }
            self.last_generation[source] = generated;
            self.service_sum += u128::from(s);
        }
        if self.cycles > 0 {
            self.sums.pooled.push(a, y_total);
        }
        self.cycles += 1;
        self.clock += u64::from(offset);
        self.cycle_sum += u128::from(offset);
        self.cycle_sq_sum += u128::from(offset) * u128::from(offset);
    }

    pub fn num_cycles(&self) -> usize {
        self.cycles
    }

    pub fn summary(&self) -> Result<AgeSummary> {
        if self.cycles < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                actual: self.cycles,
            });
        }
        Ok(AgeSummary::from_sums(
            &self.config,
            &self.sums,
            self.cycles,
            self.seed,
        ))
    }

    pub fn moments(&self) -> Result<MomentSet> {
        if self.cycles == 0 {
            return Err(Error::InsufficientData {
                needed: 1,
                actual: 0,
            });
        }
        let c = self.cycles as f64;
        let mean = self.cycle_sum as f64 / c;
        let second = self.cycle_sq_sum as f64 / c;
        let service = self.service_sum as f64 / (c * f64::from(self.config.n()));
        Ok(MomentSet {
            mean_cycle: mean,
            second_moment_cycle: second,
            mean_service: service,
            average_age: age_from_moments(mean, second, service),
            source: MomentSource::Simulation,
        })
    }

    /// Largest absolute correlation between a source's renewal interval and
    /// the service time that closes it.
    pub fn cross_term(&self) -> f64 {
        self.sums.max_abs_correlation(self.sums.pooled.intervals)
    }
}

/// Runs the simulation without storing the trace. Uses the same random
/// stream as [`simulate_cycles`].
pub fn simulate_streaming(config: &SystemConfig, num_cycles: usize, seed: u64) -> AgeAccumulator {
    let mut rng = stream(seed, 0);
    let mut acc = AgeAccumulator::new(config, seed);
    let mut groups = vec![0u32; config.m() as usize];
    let mut services = vec![0u32; config.n() as usize];
    for _ in 0..num_cycles {
        draw_cycle(config, &mut rng, &mut groups, &mut services);
        acc.push_cycle(&groups, &services);
    }
    acc
}

/// Exact renewal sums rebuilt from absolute delivery instants.
fn trace_sums(trace: &CycleTrace) -> RenewalSums {
    let n = trace.config.n() as usize;
    let mut sums = RenewalSums::new(n);
    let starts = trace.cycle_starts();
    let mut previous: Option<Vec<u64>> = None;
    for (cycle, &cycle_start) in starts.iter().enumerate() {
        let services = trace.service_times(cycle);
        let generation: Vec<u64> = trace
            .delivery_offsets(cycle)
            .iter()
            .zip(services)
            .map(|(&d, &s)| cycle_start + u64::from(d) - u64::from(s))
            .collect();
        if let Some(prev) = &previous {
            let (mut a, mut y_total) = (0u128, 0u128);
            for source in 0..n {
                let y = generation[source] - prev[source];
                a += u128::from(sums.record_interval(source, y, u64::from(services[source])));
                y_total += u128::from(y);
            }
            sums.pooled.push(a, y_total);
        }
        previous = Some(generation);
    }
    sums
}

/// Renewal-reward age estimates for every source and overall.
pub fn empirical_average_age(trace: &CycleTrace) -> Result<AgeSummary> {
    if trace.num_cycles < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            actual: trace.num_cycles,
        });
    }
    Ok(AgeSummary::from_sums(
        &trace.config,
        &trace_sums(trace),
        trace.num_cycles,
        trace.seed,
    ))
}

/// Sample moments of the cycle length and mean service time.
pub fn empirical_moments(trace: &CycleTrace) -> Result<MomentSet> {
    if trace.num_cycles == 0 {
        return Err(Error::InsufficientData {
            needed: 1,
            actual: 0,
        });
    }
    let c = trace.num_cycles as f64;
    let mean = trace
        .cycle_lengths
        .iter()
        .map(|&y| f64::from(y))
        .sum::<f64>()
        / c;
    let second = trace
        .cycle_lengths
        .iter()
        .map(|&y| f64::from(y) * f64::from(y))
        .sum::<f64>()
        / c;
    let service = trace
        .service_times
        .iter()
        .map(|&s| u64::from(s))
        .sum::<u64>() as f64
        / (c * f64::from(trace.config.n()));
    Ok(MomentSet {
        mean_cycle: mean,
        second_moment_cycle: second,
        mean_service: service,
        average_age: age_from_moments(mean, second, service),
        source: MomentSource::Simulation,
    })
}

/// Maximum over sources of `|corr(Y_ij, S_ij)|`; zero-variance series count
/// as uncorrelated.
pub fn cross_term_check(trace: &CycleTrace) -> Result<f64> {
    if trace.num_cycles < MIN_CROSS_TERM_CYCLES {
        return Err(Error::InsufficientData {
            needed: MIN_CROSS_TERM_CYCLES,
            actual: trace.num_cycles,
        });
    }
    let sums = trace_sums(trace);
    Ok(sums.max_abs_correlation(sums.pooled.intervals))
}

/// One streaming replication per seed, run on scoped worker threads. The
/// output order follows `seeds`.
pub fn replicate(
    config: &SystemConfig,
    num_cycles: usize,
    seeds: &[u64],
) -> Result<Vec<AgeSummary>> {
    let workers = thread::available_parallelism()
        .map(|w| w.get())
        .unwrap_or(1)
        .min(seeds.len().max(1));
    let chunk = seeds.len().div_ceil(workers).max(1);
    thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|&seed| simulate_streaming(config, num_cycles, seed).summary())
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        let mut out = Vec::with_capacity(seeds.len());
        for h in handles {
            out.extend(h.join().expect("replication worker panicked")?);
        }
        Ok(out)
    })
}
