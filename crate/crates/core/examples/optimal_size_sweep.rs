//! Both optimal group sizes across `p`, and the largest `p` at which group
//! updating still beats round robin.
//!
//! ```bash
//! cargo run -p group-updating --example optimal_size_sweep
//! ```

use group_updating::optimize::{kstar_sweep, updating_efficiency_threshold};

fn main() -> group_updating::Result<()> {
    let n = 120;
    let grid: Vec<f64> = (1..=25).map(|i| f64::from(i) / 100.0).collect();
    println!("   p   k_age  k_tests");
    for pt in kstar_sweep(n, &grid)? {
        let same = if pt.k_updating == pt.k_testing {
            ""
        } else {
            "  *"
        };
        println!("{:5.2} {:6} {:8}{same}", pt.p, pt.k_updating, pt.k_testing);
    }
    for n in [12, 48, 120, 600] {
        println!(
            "n = {n:>4}: group updating helps up to p = {:.6}",
            updating_efficiency_threshold(n)?
        );
    }
    Ok(())
}
