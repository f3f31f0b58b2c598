//! The group size that minimises the expected number of updates (pooled
//! testing) is not the one that minimises the age.
//!
//! ```bash
//! cargo run -p group-updating --example testing_vs_updating
//! ```

use group_updating::optimize::{
    group_testing_efficiency_threshold, optimal_group_size_testing, optimal_group_size_updating,
    stationary_group_sizes, two_root_limit,
};

fn main() -> group_updating::Result<()> {
    let n = 48;
    for p in [0.05, 0.15] {
        let gu = optimal_group_size_updating(n, p)?;
        let gt = optimal_group_size_testing(n, p)?;
        println!("n = {n}, p = {p}");
        println!(
            "  age-optimal k     = {} (age {:.4})",
            gu.optimal_k, gu.objective_at_optimum
        );
        println!(
            "  updates-optimal k = {} ({:.4} updates per cycle)",
            gt.optimal_k, gt.objective_at_optimum
        );
        if let Some(roots) = stationary_group_sizes(p)? {
            println!(
                "  stationary points of E[Y]: {:.4} (min), {:.4} (max)",
                roots.alpha1, roots.alpha2
            );
        }
        let checked: Vec<u32> = gt.candidates.iter().map(|c| c.0).collect();
        println!("  candidate k checked for E[Y]: {checked:?}");
    }

    let (k, best) = (1..=20)
        .map(|k| (k, group_testing_efficiency_threshold(k)))
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    println!("\npooled testing can beat individual testing only for p <= {best:.4} (k = {k})");
    println!(
        "two stationary points exist for p <= {:.4}",
        two_root_limit()
    );
    Ok(())
}
