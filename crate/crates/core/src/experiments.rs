//! Parameter sweeps rendered as CSV, and the closed-form / oracle /
//! simulation validation report.
//!
//! Every table has a header row, comma separators and reals printed with 12
//! significant digits. Rows come out sorted by their key columns, so output
//! bytes depend only on the inputs (and the seed list, for simulations).

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::analytic::{
    average_age, closed_form_moments, convolution_oracle, enumeration_oracle, round_robin_age,
    MomentSet, ENUMERATION_LIMIT,
};
use crate::error::{Error, Result};
use crate::model::{divisors, SystemConfig};
use crate::optimize::{kstar_sweep, optimal_group_size_testing, optimal_group_size_updating};
use crate::sim::{replicate, AgeSummary};

/// Relative tolerance between closed forms and exact oracles.
pub const ORACLE_TOLERANCE: f64 = 1e-9;
/// Width of the simulation acceptance band, in estimated standard errors.
pub const SIMULATION_BAND: f64 = 3.0;

/// `x` with 12 significant digits in plain decimal notation.
pub fn format_real(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 {
            "0.00000000000".into()
        } else {
            x.to_string()
        };
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&magnitude) {
        return format!("{x:.11e}");
    }
    let decimals = (11 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit (9.99.. -> 10.0..)
    if s.trim_start_matches('-')
        .replace('.', "")
        .trim_start_matches('0')
        .len()
        > 12
        && decimals > 0
    {
        let decimals = decimals - 1;
        return format!("{x:.decimals$}");
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.header.join(","))?;
        for row in &self.rows {
            writeln!(out, "{}", row.join(","))?;
        }
        out.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

fn sorted_unique(p_list: &[f64]) -> Result<Vec<f64>> {
    let mut ps = p_list.to_vec();
    if let Some(&bad) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Range {
            name: "p",
            value: bad,
            range: "[0, 1]",
        });
    }
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    Ok(ps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgeVsKRow {
    pub p: f64,
    pub k: u32,
    pub delta_group_updating: f64,
    pub delta_round_robin: f64,
    pub is_optimal: bool,
}

/// Average age at every divisor `k` of `n`, for each `p`, with the age
/// optimum flagged.
pub fn age_vs_k(n: u32, p_list: &[f64]) -> Result<Vec<AgeVsKRow>> {
    let mut rows = Vec::new();
    for p in sorted_unique(p_list)? {
        let best = optimal_group_size_updating(n, p)?;
        for (k, delta) in best.candidates {
            rows.push(AgeVsKRow {
                p,
                k,
                delta_group_updating: delta,
                delta_round_robin: round_robin_age(n),
                is_optimal: k == best.optimal_k,
            });
        }
    }
    Ok(rows)
}

pub fn age_vs_k_table(rows: &[AgeVsKRow]) -> Table {
    Table {
        header: vec![
            "p",
            "k",
            "delta_group_updating",
            "delta_round_robin",
            "is_optimal",
        ],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    format_real(r.p),
                    r.k.to_string(),
                    format_real(r.delta_group_updating),
                    format_real(r.delta_round_robin),
                    flag(r.is_optimal),
                ]
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgeVsNRow {
    pub p: f64,
    pub n: u32,
    pub k_star: u32,
    pub delta_at_kstar: f64,
    pub delta_round_robin: f64,
}

/// Minimum average age over group sizes for each population size.
pub fn age_vs_n(n_values: &[u32], p_list: &[f64]) -> Result<Vec<AgeVsNRow>> {
    let mut ns = n_values.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut rows = Vec::new();
    for p in sorted_unique(p_list)? {
        for &n in &ns {
            let best = optimal_group_size_updating(n, p)?;
            rows.push(AgeVsNRow {
                p,
                n,
                k_star: best.optimal_k,
                delta_at_kstar: best.objective_at_optimum,
                delta_round_robin: round_robin_age(n),
            });
        }
    }
    Ok(rows)
}

pub fn age_vs_n_table(rows: &[AgeVsNRow]) -> Table {
    Table {
        header: vec!["p", "n", "k_star", "delta_at_kstar", "delta_round_robin"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    format_real(r.p),
                    r.n.to_string(),
                    r.k_star.to_string(),
                    format_real(r.delta_at_kstar),
                    format_real(r.delta_round_robin),
                ]
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareMetricsRow {
    pub p: f64,
    pub k: u32,
    pub delta: f64,
    pub expected_updates: f64,
    pub is_gu_optimal: bool,
    pub is_gt_optimal: bool,
}

/// Average age next to expected updates per cycle, with both optima flagged.
pub fn compare_metrics(n: u32, p_list: &[f64]) -> Result<Vec<CompareMetricsRow>> {
    let mut rows = Vec::new();
    for p in sorted_unique(p_list)? {
        let gu = optimal_group_size_updating(n, p)?.optimal_k;
        let gt = optimal_group_size_testing(n, p)?.optimal_k;
        for k in divisors(n) {
            let config = SystemConfig::new(n, p, k)?;
            rows.push(CompareMetricsRow {
                p,
                k,
                delta: average_age(&config),
                expected_updates: closed_form_moments(&config).mean_cycle,
                is_gu_optimal: k == gu,
                is_gt_optimal: k == gt,
            });
        }
    }
    Ok(rows)
}

pub fn compare_metrics_table(rows: &[CompareMetricsRow]) -> Table {
    Table {
        header: vec![
            "p",
            "k",
            "delta",
            "expected_updates",
            "is_gu_optimal",
            "is_gt_optimal",
        ],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    format_real(r.p),
                    r.k.to_string(),
                    format_real(r.delta),
                    format_real(r.expected_updates),
                    flag(r.is_gu_optimal),
                    flag(r.is_gt_optimal),
                ]
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KStarRow {
    pub p: f64,
    pub k_gu_star: u32,
    pub k_gt_star: u32,
}

pub fn kstar_vs_p(n: u32, p_grid: &[f64]) -> Result<Vec<KStarRow>> {
    Ok(kstar_sweep(n, &sorted_unique(p_grid)?)?
        .into_iter()
        .map(|pt| KStarRow {
            p: pt.p,
            k_gu_star: pt.k_updating,
            k_gt_star: pt.k_testing,
        })
        .collect())
}

pub fn kstar_vs_p_table(rows: &[KStarRow]) -> Table {
    Table {
        header: vec!["p", "k_gu_star", "k_gt_star"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    format_real(r.p),
                    r.k_gu_star.to_string(),
                    r.k_gt_star.to_string(),
                ]
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRow {
    pub summary: AgeSummary,
    pub closed_form: f64,
}

/// One streaming replication per seed, in seed-list order.
pub fn simulate(
    config: &SystemConfig,
    num_cycles: usize,
    seeds: &[u64],
) -> Result<Vec<SimulationRow>> {
    let closed_form = average_age(config);
    Ok(replicate(config, num_cycles, seeds)?
        .into_iter()
        .map(|summary| SimulationRow {
            summary,
            closed_form,
        })
        .collect())
}

pub fn simulation_table(config: &SystemConfig, rows: &[SimulationRow]) -> Table {
    Table {
        header: vec![
            "seed",
            "n",
            "p",
            "k",
            "cycles",
            "delta_hat",
            "standard_error",
            "delta_closed_form",
        ],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.summary.seed.to_string(),
                    config.n().to_string(),
                    format_real(config.p()),
                    config.k().to_string(),
                    r.summary.num_cycles.to_string(),
                    format_real(r.summary.overall_age),
                    format_real(r.summary.standard_error),
                    format_real(r.closed_form),
                ]
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LegKind {
    Oracle,
    Statistical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leg {
    pub name: String,
    pub kind: LegKind,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub legs: Vec<Leg>,
    pub notices: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.legs.iter().all(|l| l.passed)
    }

    /// 0 when every leg passes, 2 for a closed-form/oracle mismatch (takes
    /// precedence), 3 for a simulation outside its band.
    pub fn exit_code(&self) -> i32 {
        let failed = |kind| self.legs.iter().any(|l| l.kind == kind && !l.passed);
        if failed(LegKind::Oracle) {
            2
        } else if failed(LegKind::Statistical) {
            3
        } else {
            0
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for note in &self.notices {
            let _ = writeln!(s, "note: {note}");
        }
        for leg in &self.legs {
            let verdict = if leg.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{verdict} {}: {}", leg.name, leg.detail);
        }
        let _ = writeln!(
            s,
            "{}",
            if self.passed() {
                "all legs passed"
            } else {
                "validation failed"
            }
        );
        s
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn compare_moments(name: &str, reference: &MomentSet, other: &MomentSet) -> Leg {
    let pairs = [
        ("E[Y]", reference.mean_cycle, other.mean_cycle),
        (
            "E[Y^2]",
            reference.second_moment_cycle,
            other.second_moment_cycle,
        ),
        ("E[S]", reference.mean_service, other.mean_service),
        ("age", reference.average_age, other.average_age),
    ];
    let worst = pairs
        .iter()
        .map(|&(label, a, b)| (label, relative_gap(a, b)))
        .fold(("", 0.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    Leg {
        name: name.to_string(),
        kind: LegKind::Oracle,
        passed: worst.1 <= ORACLE_TOLERANCE,
        detail: if worst.0.is_empty() {
            "exact agreement".to_string()
        } else {
            format!("max relative gap {:.3e} ({})", worst.1, worst.0)
        },
    }
}

/// Checks closed forms against the convolution oracle, the enumeration
/// oracle when `n` is small enough, and one simulation per seed.
pub fn validate(
    config: &SystemConfig,
    num_cycles: usize,
    seeds: &[u64],
) -> Result<ValidationReport> {
    let closed = closed_form_moments(config);
    let mut legs = vec![compare_moments(
        "closed form vs convolution oracle",
        &closed,
        &convolution_oracle(config),
    )];
    let mut notices = Vec::new();
    if config.n() <= ENUMERATION_LIMIT {
        legs.push(compare_moments(
            "closed form vs enumeration oracle",
            &closed,
            &enumeration_oracle(config)?,
        ));
    } else {
        notices.push(format!(
            "enumeration oracle skipped: n = {} exceeds {}",
            config.n(),
            ENUMERATION_LIMIT
        ));
    }
    for row in simulate(config, num_cycles, seeds)? {
        let s = &row.summary;
        let gap = (s.overall_age - row.closed_form).abs();
        let band = SIMULATION_BAND * s.standard_error + ORACLE_TOLERANCE * row.closed_form;
        legs.push(Leg {
            name: format!("simulation seed {}", s.seed),
            kind: LegKind::Statistical,
            passed: gap <= band,
            detail: format!(
                "estimate {} vs {} (se {}, {} cycles)",
                format_real(s.overall_age),
                format_real(row.closed_form),
                format_real(s.standard_error),
                s.num_cycles
            ),
        });
    }
    Ok(ValidationReport { legs, notices })
}

/// `start:stop:step`, inclusive of `stop`.
pub fn parse_u32_range(text: &str) -> std::result::Result<Vec<u32>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(format!("expected start:stop:step, got {text:?}"));
    };
    let parse = |s: &str| s.trim().parse::<u32>().map_err(|e| format!("{s:?}: {e}"));
    let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
    if step == 0 || start > stop {
        return Err(format!("empty or invalid range {text:?}"));
    }
    Ok((start..=stop).step_by(step as usize).collect())
}

/// `start:stop:step` over reals, inclusive of `stop`; grid points are rounded
/// to 12 decimals so that `0.01:0.25:0.01` yields exactly `0.13`.
pub fn parse_f64_range(text: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(format!("expected start:stop:step, got {text:?}"));
    };
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
    let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
    if step.is_nan() || step <= 0.0 || start > stop {
        return Err(format!("empty or invalid range {text:?}"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

pub fn parse_f64_list(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}")))
        .collect()
}

/// Comma-separated seeds, or a `start:stop:step` range.
pub fn parse_seeds(text: &str) -> std::result::Result<Vec<u64>, String> {
    if text.contains(':') {
        return Ok(parse_u32_range(text)?.into_iter().map(u64::from).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|e| format!("{s:?}: {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(61.0), "61.0000000000");
        assert_eq!(format_real(0.01), "0.0100000000000");
        assert_eq!(format_real(4.775), "4.77500000000");
        assert_eq!(format_real(0.0), "0.00000000000");
        assert_eq!(format_real(9.9999999999999), "10.0000000000");
        assert_eq!(format_real(-2.5), "-2.50000000000");
        assert_eq!(format_real(1e-9), "1.00000000000e-9");
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_u32_range("60:1200:60").unwrap().len(), 20);
        assert_eq!(parse_u32_range("1:1:5").unwrap(), vec![1]);
        assert!(parse_u32_range("5:1:1").is_err());
        assert!(parse_u32_range("1:5").is_err());
        let grid = parse_f64_range("0.01:0.25:0.01").unwrap();
        assert_eq!(grid.len(), 25);
        assert_eq!(grid[12], 0.13);
        assert_eq!(*grid.last().unwrap(), 0.25);
        assert_eq!(
            parse_f64_list("0.01, 0.1,0.2").unwrap(),
            vec![0.01, 0.1, 0.2]
        );
        assert!(parse_f64_list("0.1,x").is_err());
        assert_eq!(parse_seeds("3,1,2").unwrap(), vec![3, 1, 2]);
        assert_eq!(parse_seeds("1:10:1").unwrap().len(), 10);
    }

    #[test]
    fn age_vs_k_rows() {
        let rows = age_vs_k(120, &[0.4, 0.01]).unwrap();
        assert_eq!(rows.len(), 2 * divisors(120).len());
        assert_eq!(rows[0].p, 0.01);
        let flagged: Vec<_> = rows
            .iter()
            .filter(|r| r.is_optimal)
            .map(|r| (r.p, r.k))
            .collect();
        assert_eq!(flagged, vec![(0.01, 8), (0.4, 3)]);
        assert!(rows.iter().all(|r| r.delta_round_robin == 61.0));
        let min_at_04 = rows
            .iter()
            .filter(|r| r.p == 0.4)
            .map(|r| r.delta_group_updating)
            .fold(f64::INFINITY, f64::min);
        assert!(min_at_04 >= 61.0);
        assert!(age_vs_k(120, &[1.2]).is_err());
    }

    #[test]
    fn compare_rows() {
        let rows = compare_metrics(48, &[0.05, 0.15]).unwrap();
        let at = |p: f64, pick: fn(&CompareMetricsRow) -> bool| {
            rows.iter()
                .filter(|r| r.p == p && pick(r))
                .map(|r| r.k)
                .collect::<Vec<_>>()
        };
        assert_eq!(at(0.05, |r| r.is_gu_optimal), vec![4]);
        assert_eq!(at(0.05, |r| r.is_gt_optimal), vec![6]);
        assert_eq!(at(0.15, |r| r.is_gu_optimal), vec![3]);
        assert_eq!(at(0.15, |r| r.is_gt_optimal), vec![3]);
        for r in rows.iter().filter(|r| r.k == 1) {
            assert!((r.expected_updates - 48.0 * (1.0 + r.p)).abs() < 1e-9);
        }
    }

    #[test]
    fn validation_exit_codes() {
        let pass = ValidationReport {
            legs: vec![],
            notices: vec![],
        };
        assert_eq!(pass.exit_code(), 0);
        let leg = |kind, passed| Leg {
            name: String::new(),
            kind,
            passed,
            detail: String::new(),
        };
        let stat = ValidationReport {
            legs: vec![leg(LegKind::Oracle, true), leg(LegKind::Statistical, false)],
            notices: vec![],
        };
        assert_eq!(stat.exit_code(), 3);
        let both = ValidationReport {
            legs: vec![
                leg(LegKind::Oracle, false),
                leg(LegKind::Statistical, false),
            ],
            notices: vec![],
        };
        assert_eq!(both.exit_code(), 2);
    }

    #[test]
    fn validation_degenerate_is_exact() {
        let c = SystemConfig::new(4, 0.0, 2).unwrap();
        let report = validate(&c, 1_000, &[1, 2]).unwrap();
        assert!(report.passed(), "{}", report.render());
        assert_eq!(report.legs.len(), 4);
    }
}
