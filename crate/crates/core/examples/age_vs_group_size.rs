//! Average age against group size for 120 sources, next to round robin.
//!
//! ```bash
//! cargo run -p group-updating --example age_vs_group_size
//! ```

use group_updating::analytic::round_robin_age;
use group_updating::optimize::optimal_group_size_updating;

fn main() -> group_updating::Result<()> {
    let n = 120;
    println!("round robin: {}", round_robin_age(n));
    for p in [0.01, 0.1, 0.2, 0.4] {
        let best = optimal_group_size_updating(n, p)?;
        println!("\np = {p}");
        for (k, age) in &best.candidates {
            let mark = if *k == best.optimal_k {
                "  <- optimal"
            } else {
                ""
            };
            println!("  k = {k:>3}  age = {age:>9.4}{mark}");
        }
        let beats = best.objective_at_optimum < round_robin_age(n);
        println!("  group updating beats round robin: {beats}");
    }
    Ok(())
}
