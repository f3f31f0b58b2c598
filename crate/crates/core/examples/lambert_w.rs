//! Both real branches of the Lambert W function.
//!
//! ```bash
//! cargo run -p group-updating --example lambert_w
//! ```

use group_updating::lambertw::{lambert_w0, lambert_wm1};

fn main() -> group_updating::Result<()> {
    let branch_point = -1.0 / std::f64::consts::E;
    println!("{:>14} {:>20} {:>20}", "y", "W0(y)", "W-1(y)");
    for y in [branch_point, -0.3, -0.2, -0.1, -1e-3, -1e-8, -1e-12] {
        let (a, b) = (lambert_w0(y)?, lambert_wm1(y)?);
        println!("{y:>14.6e} {a:>20.15} {b:>20.15}");
        assert!((a * a.exp() - y).abs() <= 1e-12 * y.abs());
        assert!((b * b.exp() - y).abs() <= 1e-12 * y.abs());
    }
    println!("W0(1) = {} (omega constant)", lambert_w0(1.0)?);
    match lambert_wm1(0.5) {
        Ok(v) => println!("unexpected value {v}"),
        Err(e) => println!("W-1(0.5): {e}"),
    }
    Ok(())
}
