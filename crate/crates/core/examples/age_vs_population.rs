//! Minimum average age as the population grows, with the group size
//! re-optimised for every `n`.
//!
//! ```bash
//! cargo run -p group-updating --example age_vs_population
//! ```

use group_updating::experiments::{age_vs_n, age_vs_n_table};

fn main() -> group_updating::Result<()> {
    let ns: Vec<u32> = (60..=1200).step_by(60).collect();
    let rows = age_vs_n(&ns, &[0.01, 0.1, 0.2, 0.4])?;
    print!("{}", age_vs_n_table(&rows).to_csv_string());
    Ok(())
}
