//! Simulate the update timeline and compare the renewal-reward age estimate
//! with the closed form and both exact oracles.
//!
//! ```bash
//! cargo run --release -p group-updating --example monte_carlo
//! ```

use group_updating::analytic::{average_age, convolution_oracle, enumeration_oracle};
use group_updating::experiments::validate;
use group_updating::sim::{cross_term_check, empirical_moments, replicate, simulate_cycles};
use group_updating::SystemConfig;

fn main() -> group_updating::Result<()> {
    let small = SystemConfig::new(4, 0.5, 2)?;
    println!("closed form    : {:?}", average_age(&small));
    println!("convolution    : {:?}", convolution_oracle(&small));
    println!("enumeration    : {:?}", enumeration_oracle(&small)?);

    let trace = simulate_cycles(&small, 100_000, 7);
    println!("simulation     : {:?}", empirical_moments(&trace)?);
    println!(
        "max |corr(Y, S)| over sources: {:.4}",
        cross_term_check(&trace)?
    );

    let config = SystemConfig::new(120, 0.1, 4)?;
    let exact = average_age(&config);
    println!("\nn=120, p=0.1, k=4: closed form {exact:.4}");
    for s in replicate(&config, 100_000, &[1, 2, 3, 4, 5])? {
        let z = (s.overall_age - exact) / s.standard_error;
        println!(
            "  seed {}: estimate {:.4} (se {:.4}, z = {z:+.2})",
            s.seed, s.overall_age, s.standard_error
        );
    }

    println!();
    print!("{}", validate(&config, 100_000, &[11, 12])?.render());
    Ok(())
}
