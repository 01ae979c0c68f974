//! Recovery errors of the scaling scheme over every scalable magnitude.
//!
//! Each weight in [256, 2295] is downscaled to int9 and recovered through
//! the 8-bit reverse approximation; the sweep reports per-weight and mean
//! errors. Run with:
//!
//! ```text
//! cargo run -p winoint --example static_error_sweep
//! ```

use winoint::static_error_sweep;

fn main() {
    let report = static_error_sweep(256..=2295).expect("population is valid");

    println!("weight  n/2^shift   down    up   err   prop");
    for r in report.records.iter().step_by(204) {
        println!(
            "{:>6}  {:>3}/{:<4} {:>6} {:>6} {:>4}   {:.4}%",
            r.weight,
            r.n,
            1u32 << r.shift,
            r.down,
            r.up,
            r.num_err,
            r.prop_err * 100.0
        );
    }
    let worst = report.records.iter().max_by_key(|r| r.num_err).unwrap();
    println!(
        "\nworst numerical error: {} at weight {} (factor {}/{})",
        worst.num_err,
        worst.weight,
        worst.n,
        1u32 << worst.shift
    );
    println!(
        "means over {} weights: numerical {:.4}, proportional {:.4}%",
        report.records.len(),
        report.mean_numerical,
        report.mean_proportional * 100.0
    );
}
